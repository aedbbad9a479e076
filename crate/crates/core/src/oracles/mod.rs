//! Objective functions with known regularity constants.
//!
//! Every oracle carries its [`RegularityClass`] `(μ, L)` and, when known, the
//! optimal value `f*`. Oracles are immutable; setting or replacing `f*`
//! produces a new value.

mod composite;
mod fstar;
mod logistic;
mod quadratic;

pub use composite::{
    make_lasso, CompositeOracle, L1Norm, LeastSquares, NoRegularizer, Regularizer,
};
pub use fstar::{estimate_f_star, estimate_f_star_composite, FStarEstimate};
pub use logistic::{make_logistic, Logistic};
pub use quadratic::{make_quadratic, Quadratic, ISOTROPIC_MARGIN};

use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Strong convexity modulus `mu` and gradient Lipschitz constant `l`, with
/// `0 <= mu < l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityClass {
    mu: f64,
    l: f64,
}

impl RegularityClass {
    pub fn new(mu: f64, l: f64) -> Result<Self> {
        if !(mu.is_finite() && l.is_finite() && mu >= 0.0 && mu < l) {
            return Err(Error::InvalidClass { mu, l });
        }
        Ok(Self { mu, l })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Inverse condition number `μ/L`.
    pub fn kappa(&self) -> f64 {
        self.mu / self.l
    }

    /// Coefficient `μ / (2(1 − μ/L))` of the interpolation inequality.
    pub fn interpolation_weight(&self) -> f64 {
        self.mu / (2.0 * (1.0 - self.mu / self.l))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Confidence {
    /// Known analytically.
    Exact,
    /// Estimated by a run that met its stopping tolerance.
    Converged,
    /// Estimated by a run that exhausted its budget.
    LowConfidence,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimalValue {
    pub value: f64,
    pub confidence: Confidence,
}

impl OptimalValue {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            confidence: Confidence::Exact,
        }
    }
}

/// A differentiable objective on `R^n`.
pub trait SmoothOracle: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
    fn class(&self) -> RegularityClass;
    fn optimum(&self) -> Option<OptimalValue>;

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        (self.value(x), self.gradient(x))
    }

    fn f_star(&self) -> Option<f64> {
        self.optimum().map(|o| o.value)
    }

    fn x_star(&self) -> Option<&Vector> {
        None
    }
}

impl<T: SmoothOracle + ?Sized> SmoothOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        (**self).gradient(x)
    }
    fn class(&self) -> RegularityClass {
        (**self).class()
    }
    fn optimum(&self) -> Option<OptimalValue> {
        (**self).optimum()
    }
    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        (**self).value_and_gradient(x)
    }
    fn x_star(&self) -> Option<&Vector> {
        (**self).x_star()
    }
}

/// Left-hand side of the interpolation inequality between `(x, f(x), g(x))`
/// and `(y, f(y), g(y))` for the class `(μ, L)`:
///
/// `f(x) − f(y) + gₓᵀ(y − x) + ‖gₓ − g_y‖²/(2L) + μ/(2(1−μ/L))‖x − y − (gₓ − g_y)/L‖²`.
///
/// Nonpositive for every function of the class.
pub fn interpolation_lhs(
    class: RegularityClass,
    (x, fx, gx): (&Vector, f64, &Vector),
    (y, fy, gy): (&Vector, f64, &Vector),
) -> f64 {
    let l = class.l();
    let dg = gx - gy;
    let shifted = x - y - &dg / l;
    fx - fy
        + gx.dot(&(y - x))
        + dg.norm_squared() / (2.0 * l)
        + class.interpolation_weight() * shifted.norm_squared()
}
