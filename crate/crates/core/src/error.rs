use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid regularity class: mu = {mu}, L = {l} (need 0 <= mu < L)")]
    InvalidClass { mu: f64, l: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is zero; smoothness constant would be 0")]
    ZeroMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty data")]
    EmptyData,

    #[error("invalid label {0}; expected -1 or +1")]
    InvalidLabel(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("optimal value f* is not set on the oracle")]
    MissingFStar,

    #[error("minimizer x* is required but unknown")]
    MissingMinimizer,

    #[error("gradient vanished at iteration {iteration}; iterate is optimal")]
    GradientVanished { iteration: usize },

    #[error("non-finite value encountered at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("method {0} is not available for this problem")]
    UnsupportedMethod(String),

    #[error("{what} = {value} outside its domain [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("performance estimation problem infeasible at gamma = {gamma}")]
    Infeasible { gamma: f64 },

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: expected two label classes, found {found}")]
    TooManyClasses { path: PathBuf, found: usize },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) | Error::UnsupportedMethod(_) => 2,
            Error::Parse { .. }
            | Error::TooManyClasses { .. }
            | Error::EmptyData
            | Error::InvalidLabel(_)
            | Error::DimensionMismatch { .. }
            | Error::Csv(_) => 3,
            Error::NonFinite { .. }
            | Error::Infeasible { .. }
            | Error::Domain { .. }
            | Error::InvalidClass { .. }
            | Error::NotSymmetric { .. }
            | Error::ZeroMatrix
            | Error::MissingFStar
            | Error::MissingMinimizer
            | Error::GradientVanished { .. } => 4,
            Error::Io(_) => 1,
        }
    }
}
