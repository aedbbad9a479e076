//! Gradient and accelerated gradient methods driven by Polyak steps.
//!
//! Step sizes and momentum are computed from the optimal value `f*` instead of
//! the strong convexity modulus. Besides the methods themselves the crate
//! ships the tools used to analyse them:
//!
//! * [`rates`]: closed-form worst-case rates and Lyapunov potentials,
//! * [`pep`]: the one-iteration performance estimation problem for Polyak
//!   steps, solved exactly by KKT enumeration,
//! * [`certificates`]: numerical verification of the weighted-sum proof
//!   certificates behind every rate,
//! * [`oracles`], [`data`] and [`experiment`]: test problems, dataset loading
//!   and the experiment harness behind the `polyak` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod data;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod linalg;
pub mod methods;
pub mod oracles;
pub mod pep;
pub mod rates;

pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::{Matrix, Vector};
