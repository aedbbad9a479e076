use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::{DataFormat, DatasetSpec, ExperimentConfig, FStarPolicy, ProblemKind};
use crate::data::{self, CsvOptions, Dataset};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::oracles::{
    estimate_f_star, estimate_f_star_composite, make_lasso, make_logistic, CompositeOracle,
    Confidence, L1Norm, LeastSquares, Logistic, OptimalValue, Quadratic, RegularityClass,
    SmoothOracle,
};

/// Random streams drawn from one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Data = 0,
    Start = 1,
    Center = 2,
}

pub fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

pub fn standard_normal_vector(n: usize, rng: &mut ChaCha8Rng) -> Vector {
    Vector::from_iterator(n, StandardNormal.sample_iter(rng).take(n))
}

fn standard_normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_iterator(
        rows,
        cols,
        StandardNormal.sample_iter(rng).take(rows * cols),
    )
}

/// `n` values log-spaced from `l` down to `mu` (linear when `mu = 0`).
pub fn log_spectrum(n: usize, mu: f64, l: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = if n > 1 {
                i as f64 / (n - 1) as f64
            } else {
                0.0
            };
            if mu > 0.0 {
                l * (mu / l).powf(t)
            } else {
                l * (1.0 - t)
            }
        })
        .collect()
}

fn symmetrize(m: Matrix) -> Matrix {
    (&m + m.transpose()) * 0.5
}

/// `rows × dim` matrix `A = U diag(√λ) Vᵀ` with `λ` log-spaced on `[mu, l]`;
/// needs `rows ≥ dim`.
pub fn synthetic_features(rows: usize, dim: usize, mu: f64, l: f64, seed: u64) -> Result<Matrix> {
    if rows < dim {
        return Err(Error::Config(format!(
            "need rows >= dim, got {rows} x {dim}"
        )));
    }
    let mut rng = rng(seed, Stream::Data);
    let u = standard_normal_matrix(rows, dim, &mut rng).qr().q();
    let v = standard_normal_matrix(dim, dim, &mut rng).qr().q();
    let s = Vector::from_vec(
        log_spectrum(dim, mu, l)
            .into_iter()
            .map(f64::sqrt)
            .collect(),
    );
    Ok(u * Matrix::from_diagonal(&s) * v.transpose())
}

/// Gaussian rows whose neighbouring columns have correlation `0.9`.
pub fn correlated_features(rows: usize, dim: usize, seed: u64) -> Matrix {
    let mut rng = rng(seed, Stream::Data);
    let mut a = standard_normal_matrix(rows, dim, &mut rng);
    let c = 0.9_f64;
    let s = (1.0 - c * c).sqrt();
    for i in 0..rows {
        for j in 1..dim {
            a[(i, j)] = c * a[(i, j - 1)] + s * a[(i, j)];
        }
    }
    a
}

/// Least-squares quadratic with the spectrum of [`synthetic_features`] and a
/// consistent right-hand side, so that `f* = 0` and `(μ, L)` are exact.
pub fn synthetic_least_squares(
    rows: usize,
    dim: usize,
    mu: f64,
    l: f64,
    seed: u64,
) -> Result<Quadratic> {
    let a = synthetic_features(rows, dim, mu, l, seed)?;
    let center = standard_normal_vector(dim, &mut rng(seed, Stream::Center));
    Quadratic::with_class(
        symmetrize(a.tr_mul(&a)),
        center,
        RegularityClass::new(mu, l)?,
    )
}

/// Quadratic `½(x − c)ᵀH(x − c)` where `H` shares the eigenvectors of `AᵀA`
/// and its eigenvalues are mapped affinely onto `[mu, l]`.
pub fn rescaled_quadratic(features: &Matrix, center: Vector, mu: f64, l: f64) -> Result<Quadratic> {
    let eig = SymmetricEigen::new(symmetrize(features.tr_mul(features)));
    let lo = eig.eigenvalues.min();
    let hi = eig.eigenvalues.max();
    if !(hi > lo) {
        return Err(Error::InvalidParameter(
            "flat spectrum cannot be rescaled".to_string(),
        ));
    }
    let mapped = eig
        .eigenvalues
        .map(|v| mu + (l - mu) * (v - lo) / (hi - lo));
    let h = &eig.eigenvectors * Matrix::from_diagonal(&mapped) * eig.eigenvectors.transpose();
    Quadratic::with_class(symmetrize(h), center, RegularityClass::new(mu, l)?)
}

pub fn load_dataset(spec: &DatasetSpec, binary: bool) -> Result<Dataset> {
    if !spec.path.exists() {
        return Err(Error::Config(format!(
            "dataset {} not found",
            spec.path.display()
        )));
    }
    let mut d = match spec.format {
        DataFormat::Csv => data::load_csv_with(
            &spec.path,
            &CsvOptions {
                label_column: spec.label_column,
                has_header: spec.header,
                binary,
            },
        )?,
        DataFormat::Libsvm => {
            let mut d = data::load_libsvm(&spec.path)?;
            if binary {
                d.labels = Vector::from_vec(data::coerce_binary(d.labels.as_slice(), &spec.path)?);
            }
            d
        }
    };
    if spec.standardize {
        d = data::standardize(&d, None)?;
    }
    if spec.intercept {
        d = d.with_intercept();
    }
    Ok(d)
}

/// An instantiated problem with its `f*`.
#[derive(Debug)]
pub enum Problem {
    Quadratic(Quadratic),
    Logistic(Logistic),
    Lasso(CompositeOracle<LeastSquares, L1Norm>),
}

impl Problem {
    pub fn dim(&self) -> usize {
        match self {
            Problem::Quadratic(q) => q.dim(),
            Problem::Logistic(o) => o.dim(),
            Problem::Lasso(c) => c.dim(),
        }
    }

    pub fn class(&self) -> RegularityClass {
        match self {
            Problem::Quadratic(q) => q.class(),
            Problem::Logistic(o) => o.class(),
            Problem::Lasso(c) => c.class(),
        }
    }

    pub fn optimum(&self) -> Option<OptimalValue> {
        match self {
            Problem::Quadratic(q) => q.optimum(),
            Problem::Logistic(o) => o.optimum(),
            Problem::Lasso(c) => c.optimum(),
        }
    }
}

fn presolved(cfg: &ExperimentConfig, value: f64, converged: bool) -> Result<OptimalValue> {
    if !converged && !cfg.allow_low_confidence {
        return Err(Error::Config(format!(
            "f* presolve did not converge in {} iterations; set allow_low_confidence = true to proceed",
            cfg.presolve_budget
        )));
    }
    Ok(OptimalValue {
        value,
        confidence: if converged {
            Confidence::Converged
        } else {
            Confidence::LowConfidence
        },
    })
}

/// Builds the configured problem and sets `f*` according to the policy.
pub fn build_problem(cfg: &ExperimentConfig) -> Result<Problem> {
    let binary = matches!(cfg.problem, ProblemKind::Logistic { .. });
    let dataset = cfg
        .dataset
        .as_ref()
        .map(|d| load_dataset(d, binary))
        .transpose()?;
    let problem = match (cfg.problem, dataset) {
        (ProblemKind::Quadratic, None) => Problem::Quadratic(synthetic_least_squares(
            cfg.rows, cfg.dim, cfg.mu, cfg.l, cfg.seed,
        )?),
        (ProblemKind::Quadratic, Some(d)) => {
            let d = data::standardize(&d, Some(cfg.l))?;
            Problem::Quadratic(Quadratic::least_squares(&d.features, &d.labels)?)
        }
        (ProblemKind::Rescaled, d) => {
            let a = match d {
                Some(d) => d.features,
                None => correlated_features(cfg.rows, cfg.dim, cfg.seed),
            };
            let center = standard_normal_vector(a.ncols(), &mut rng(cfg.seed, Stream::Center));
            Problem::Quadratic(rescaled_quadratic(&a, center, cfg.mu, cfg.l)?)
        }
        (ProblemKind::Logistic { reg }, Some(d)) => {
            Problem::Logistic(make_logistic(d.features, d.labels, reg)?)
        }
        (ProblemKind::Logistic { .. }, None) => {
            return Err(Error::Config(
                "logistic problems need a dataset".to_string(),
            ))
        }
        (ProblemKind::Lasso { l1 }, d) => {
            let (a, b) = match d {
                Some(d) => (d.features, d.labels),
                None => {
                    let a = synthetic_features(cfg.rows, cfg.dim, cfg.mu, cfg.l, cfg.seed)?;
                    let b = standard_normal_vector(cfg.rows, &mut rng(cfg.seed, Stream::Center));
                    (a, b)
                }
            };
            Problem::Lasso(make_lasso(a, b, l1)?)
        }
    };
    let zero = Vector::zeros(problem.dim());
    Ok(match (problem, cfg.f_star) {
        (Problem::Quadratic(q), FStarPolicy::Exact) => Problem::Quadratic(q),
        (_, FStarPolicy::Exact) => {
            return Err(Error::Config(
                "f* is not known in closed form for this problem; use fstar = presolve or a value"
                    .to_string(),
            ))
        }
        (Problem::Quadratic(_), _) => {
            return Err(Error::Config(
                "quadratic problems use their exact f*; set fstar = exact".to_string(),
            ))
        }
        (Problem::Logistic(o), FStarPolicy::Value(v)) => {
            Problem::Logistic(o.with_optimum(OptimalValue {
                value: v,
                confidence: Confidence::Exact,
            }))
        }
        (Problem::Logistic(o), FStarPolicy::Presolve) => {
            let est = estimate_f_star(&o, &zero, cfg.presolve_budget, cfg.presolve_tol)?;
            let opt = presolved(cfg, est.value, est.converged)?;
            Problem::Logistic(o.with_optimum(opt))
        }
        (Problem::Lasso(c), FStarPolicy::Value(v)) => {
            Problem::Lasso(c.with_optimum(OptimalValue::exact(v)))
        }
        (Problem::Lasso(c), FStarPolicy::Presolve) => {
            let est = estimate_f_star_composite(&c, &zero, cfg.presolve_budget, cfg.presolve_tol)?;
            let opt = presolved(cfg, est.value, est.converged)?;
            Problem::Lasso(c.with_optimum(opt).with_minimizer(est.minimizer))
        }
    })
}
