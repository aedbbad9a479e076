use super::{OptimalValue, RegularityClass, SmoothOracle};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// A proper convex function with an available proximal operator.
pub trait Regularizer: Send + Sync {
    fn value(&self, x: &Vector) -> f64;

    /// `argmin_y h(y) + ‖y − x‖²/(2t)`.
    fn prox(&self, x: &Vector, t: f64) -> Vector;
}

/// `h ≡ 0`; its prox is the identity.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoRegularizer;

impl Regularizer for NoRegularizer {
    fn value(&self, _x: &Vector) -> f64 {
        0.0
    }

    fn prox(&self, x: &Vector, _t: f64) -> Vector {
        x.clone()
    }
}

/// `h(x) = weight·‖x‖₁`; prox is soft-thresholding at `t·weight`.
#[derive(Clone, Copy, Debug)]
pub struct L1Norm {
    pub weight: f64,
}

impl Regularizer for L1Norm {
    fn value(&self, x: &Vector) -> f64 {
        self.weight * x.lp_norm(1)
    }

    fn prox(&self, x: &Vector, t: f64) -> Vector {
        let thr = t * self.weight;
        x.map(|v| v.signum() * (v.abs() - thr).max(0.0))
    }
}

/// `½‖Ax − b‖²` evaluated from the residual.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    features: Matrix,
    labels: Vector,
    class: RegularityClass,
}

impl LeastSquares {
    /// `L = ‖A‖²`; `μ` is the smallest eigenvalue of `AᵀA` when `A` has full
    /// column rank, else 0.
    pub fn new(features: Matrix, labels: Vector) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::EmptyData);
        }
        linalg::check_dim(&labels, features.nrows())?;
        let l = linalg::operator_norm_sq(&features);
        if !(l > 0.0) {
            return Err(Error::ZeroMatrix);
        }
        let mu = if features.nrows() >= features.ncols() {
            linalg::smallest_eigenvalue(&features.tr_mul(&features))
        } else {
            0.0
        };
        let mu = mu.clamp(0.0, l * (1.0 - super::ISOTROPIC_MARGIN));
        Ok(Self {
            features,
            labels,
            class: RegularityClass::new(mu, l)?,
        })
    }
}

impl SmoothOracle for LeastSquares {
    fn dim(&self) -> usize {
        self.features.ncols()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * (&self.features * x - &self.labels).norm_squared()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.features.tr_mul(&(&self.features * x - &self.labels))
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let r = &self.features * x - &self.labels;
        (0.5 * r.norm_squared(), self.features.tr_mul(&r))
    }

    fn class(&self) -> RegularityClass {
        self.class
    }

    fn optimum(&self) -> Option<OptimalValue> {
        None
    }
}

/// `F = f + h` with `f` smooth and `h` proximable. `optimum` refers to `F*`.
#[derive(Clone, Debug)]
pub struct CompositeOracle<S, R> {
    pub smooth: S,
    pub regularizer: R,
    optimum: Option<OptimalValue>,
    x_star: Option<Vector>,
}

impl<S: SmoothOracle, R: Regularizer> CompositeOracle<S, R> {
    pub fn new(smooth: S, regularizer: R) -> Self {
        Self {
            smooth,
            regularizer,
            optimum: None,
            x_star: None,
        }
    }

    pub fn with_optimum(mut self, optimum: OptimalValue) -> Self {
        self.optimum = Some(optimum);
        self
    }

    pub fn with_minimizer(mut self, x_star: Vector) -> Self {
        self.x_star = Some(x_star);
        self
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    pub fn class(&self) -> RegularityClass {
        self.smooth.class()
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.smooth.value(x) + self.regularizer.value(x)
    }

    pub fn prox(&self, x: &Vector, t: f64) -> Vector {
        self.regularizer.prox(x, t)
    }

    pub fn optimum(&self) -> Option<OptimalValue> {
        self.optimum
    }

    pub fn f_star(&self) -> Option<f64> {
        self.optimum.map(|o| o.value)
    }

    pub fn x_star(&self) -> Option<&Vector> {
        self.x_star.as_ref()
    }

    /// Proximal gradient point `prox_{h/L}(x − ∇f(x)/L)` and the gradient used.
    pub fn prox_gradient_point(&self, x: &Vector) -> (Vector, Vector) {
        let l = self.class().l();
        let g = self.smooth.gradient(x);
        (self.prox(&(x - &g / l), 1.0 / l), g)
    }

    /// `D(x, L) = −2L·min_y [⟨∇f(x), y − x⟩ + (L/2)‖x − y‖² + h(y) − h(x)]`,
    /// evaluated at the minimizer `y⁺ = prox_{h/L}(x − ∇f(x)/L)`.
    ///
    /// Equals `‖∇f(x)‖²` when `h ≡ 0` and vanishes at minimizers of `F`.
    pub fn local_curvature_gap(&self, x: &Vector) -> f64 {
        let (plus, grad) = self.prox_gradient_point(x);
        let l = self.class().l();
        let d = &plus - x;
        let inner = grad.dot(&d) + 0.5 * l * d.norm_squared() + self.regularizer.value(&plus)
            - self.regularizer.value(x);
        -2.0 * l * inner
    }
}

/// LASSO: `½‖Ax − b‖² + l1_weight·‖x‖₁`.
pub fn make_lasso(
    features: Matrix,
    labels: Vector,
    l1_weight: f64,
) -> Result<CompositeOracle<LeastSquares, L1Norm>> {
    if !(l1_weight > 0.0 && l1_weight.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "l1 weight {l1_weight} must be > 0"
        )));
    }
    let smooth = LeastSquares::new(features, labels)?;
    Ok(CompositeOracle::new(smooth, L1Norm { weight: l1_weight }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn soft_threshold() {
        let h = L1Norm { weight: 1.0 };
        assert_eq!(h.prox(&v(&[2.0, -0.5]), 1.0), v(&[1.0, 0.0]));
        assert_eq!(h.prox(&v(&[-3.0, 0.25]), 0.5), v(&[-2.5, 0.0]));
    }

    #[test]
    fn identity_lasso_optimum_at_zero() {
        let lasso = make_lasso(Matrix::identity(2, 2), Vector::zeros(2), 0.7).unwrap();
        assert_eq!(lasso.value(&Vector::zeros(2)), 0.0);
        assert!(lasso.local_curvature_gap(&Vector::zeros(2)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_lasso_instance() {
        let lasso = make_lasso(Matrix::identity(2, 2), v(&[3.0, 0.2]), 1.0).unwrap();
        let x_star = v(&[2.0, 0.0]);
        assert!((lasso.value(&x_star) - 2.52).abs() < 1e-14);
        assert!(lasso.local_curvature_gap(&x_star).abs() < 1e-14);
        // class of the smooth part: A = I
        assert!((lasso.class().l() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn curvature_gap_without_regularizer_is_grad_norm() {
        let ls = LeastSquares::new(
            Matrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 1.0, 1.0, 0.0]),
            v(&[1.0, 0.0, 2.0]),
        )
        .unwrap();
        let comp = CompositeOracle::new(ls.clone(), NoRegularizer);
        let x = v(&[0.3, -0.7]);
        let g = ls.gradient(&x);
        let d = comp.local_curvature_gap(&x);
        assert!((d - g.norm_squared()).abs() <= 1e-12 * g.norm_squared());
    }

    #[test]
    fn errors() {
        assert!(make_lasso(Matrix::identity(2, 2), Vector::zeros(3), 1.0).is_err());
        assert!(make_lasso(Matrix::identity(2, 2), Vector::zeros(2), 0.0).is_err());
    }
}
