use super::{OptimalValue, RegularityClass, SmoothOracle};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Relative gap kept between `μ` and `L` when the spectrum is flat.
///
/// An isotropic quadratic `½L‖x‖²` belongs to every class `(μ, L)` with
/// `μ ≤ L`, but the class type needs `μ < L`.
pub const ISOTROPIC_MARGIN: f64 = 1e-8;

/// `f(x) = ½(x − c)ᵀA(x − c) + f*` with `A` symmetric positive semidefinite.
#[derive(Clone, Debug)]
pub struct Quadratic {
    matrix: Matrix,
    center: Vector,
    offset: f64,
    class: RegularityClass,
}

/// Builds `½(x − c)ᵀA(x − c)` and reads its class off the extreme eigenvalues
/// (power iteration for `L`, inverse iteration for `μ`).
pub fn make_quadratic(matrix: Matrix, target: Vector) -> Result<Quadratic> {
    linalg::check_symmetric(&matrix)?;
    linalg::check_dim(&target, matrix.nrows())?;
    let l = linalg::largest_eigenvalue(&matrix);
    if !(l > 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let mu = linalg::smallest_eigenvalue(&matrix).clamp(0.0, l * (1.0 - ISOTROPIC_MARGIN));
    let class = RegularityClass::new(mu, l)?;
    Ok(Quadratic {
        matrix,
        center: target,
        offset: 0.0,
        class,
    })
}

impl Quadratic {
    /// Quadratic with a caller-supplied class (e.g. when the spectrum is known
    /// by construction). The class is trusted.
    pub fn with_class(matrix: Matrix, center: Vector, class: RegularityClass) -> Result<Self> {
        linalg::check_symmetric(&matrix)?;
        linalg::check_dim(&center, matrix.nrows())?;
        Ok(Self {
            matrix,
            center,
            offset: 0.0,
            class,
        })
    }

    /// `½‖Ax − b‖²` rewritten around its least-squares solution, so that gaps
    /// are computed without cancellation.
    pub fn least_squares(features: &Matrix, labels: &Vector) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::EmptyData);
        }
        linalg::check_dim(labels, features.nrows())?;
        let gram = features.tr_mul(features);
        let svd = features.clone().svd(true, true);
        let center = svd
            .solve(labels, 1e-14 * svd.singular_values.max())
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let residual = features * &center - labels;
        let mut q = make_quadratic(gram, center)?;
        q.offset = 0.5 * residual.norm_squared();
        Ok(q)
    }

    /// Diagonal quadratic `½Σ λᵢ(xᵢ − cᵢ)²` with exact class `(min λ, max λ)`.
    pub fn diagonal(eigenvalues: &[f64], center: Vector) -> Result<Self> {
        let l = eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mu = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let class = RegularityClass::new(mu.max(0.0), l)?;
        Self::with_class(
            Matrix::from_diagonal(&Vector::from_column_slice(eigenvalues)),
            center,
            class,
        )
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }
}

impl SmoothOracle for Quadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        let d = x - &self.center;
        0.5 * d.dot(&(&self.matrix * &d)) + self.offset
    }

    fn gradient(&self, x: &Vector) -> Vector {
        &self.matrix * (x - &self.center)
    }

    fn value_and_gradient(&self, x: &Vector) -> (f64, Vector) {
        let d = x - &self.center;
        let g = &self.matrix * &d;
        (0.5 * d.dot(&g) + self.offset, g)
    }

    fn class(&self) -> RegularityClass {
        self.class
    }

    fn optimum(&self) -> Option<OptimalValue> {
        Some(OptimalValue::exact(self.offset))
    }

    fn x_star(&self) -> Option<&Vector> {
        Some(&self.center)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_value_and_gradient() {
        let q = make_quadratic(Matrix::identity(3, 3), Vector::zeros(3)).unwrap();
        let e1 = Vector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!((q.value(&e1) - 0.5).abs() < 1e-15);
        assert_eq!(q.gradient(&e1), e1);
        assert!((q.class().l() - 1.0).abs() < 1e-12);
        assert!(q.class().mu() < q.class().l());
    }

    #[test]
    fn diagonal_class_read_off() {
        let m = Matrix::from_diagonal(&Vector::from_vec(vec![0.01, 1.0]));
        let q = make_quadratic(m, Vector::zeros(2)).unwrap();
        assert!((q.class().mu() - 0.01).abs() < 1e-12);
        assert!((q.class().l() - 1.0).abs() < 1e-12);
        assert_eq!(q.f_star(), Some(0.0));
    }

    #[test]
    fn errors() {
        let asym = Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            make_quadratic(asym, Vector::zeros(2)),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(matches!(
            make_quadratic(Matrix::zeros(2, 2), Vector::zeros(2)),
            Err(Error::ZeroMatrix)
        ));
        assert!(matches!(
            make_quadratic(Matrix::identity(2, 2), Vector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn least_squares_offset_is_residual() {
        let a = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = Vector::from_vec(vec![1.0, 1.0, 0.0]);
        let q = Quadratic::least_squares(&a, &b).unwrap();
        let direct = |x: &Vector| 0.5 * (&a * x - &b).norm_squared();
        for x in [
            Vector::from_vec(vec![0.3, -2.0]),
            Vector::from_vec(vec![5.0, 1.0]),
        ] {
            assert!((q.value(&x) - direct(&x)).abs() < 1e-12);
        }
        // x* = (1/3, 1/3), residual (2/3, 2/3, -2/3)
        assert!((q.f_star().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }
}
