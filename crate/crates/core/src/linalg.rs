//! Dense linear-algebra helpers: spectral estimates by power iteration.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Relative residual tolerance for power iteration.
pub const POWER_TOL: f64 = 1e-10;
/// Iteration cap for power iteration.
pub const POWER_MAX_ITER: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct EigenEstimate {
    pub value: f64,
    pub vector: Vector,
    pub iterations: usize,
    pub converged: bool,
}

// Deterministic start vector, not orthogonal to any coordinate axis.
fn start_vector(dim: usize) -> Vector {
    let v = Vector::from_fn(dim, |i, _| {
        1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_75).fract()
    });
    let norm = v.norm();
    v / norm
}

/// Top eigenpair of a symmetric positive semidefinite operator.
///
/// Stops once `‖Av − λv‖ ≤ tol·λ`, where `λ` is the Rayleigh quotient.
pub fn power_iteration<F>(dim: usize, apply: F, tol: f64, max_iter: usize) -> EigenEstimate
where
    F: Fn(&Vector) -> Vector,
{
    let mut v = start_vector(dim);
    let mut lambda = 0.0;
    for it in 1..=max_iter {
        let w = apply(&v);
        lambda = v.dot(&w);
        let w_norm = w.norm();
        if w_norm == 0.0 {
            return EigenEstimate {
                value: 0.0,
                vector: v,
                iterations: it,
                converged: true,
            };
        }
        let residual = (&w - lambda * &v).norm();
        if residual <= tol * lambda.abs() {
            return EigenEstimate {
                value: lambda,
                vector: v,
                iterations: it,
                converged: true,
            };
        }
        v = w / w_norm;
    }
    EigenEstimate {
        value: lambda,
        vector: v,
        iterations: max_iter,
        converged: false,
    }
}

/// Largest eigenvalue of a symmetric PSD matrix.
pub fn largest_eigenvalue(matrix: &Matrix) -> f64 {
    power_iteration(matrix.nrows(), |v| matrix * v, POWER_TOL, POWER_MAX_ITER).value
}

/// Smallest eigenvalue of a symmetric PSD matrix by inverse iteration.
///
/// Returns 0 when the matrix is numerically singular (Cholesky fails).
pub fn smallest_eigenvalue(matrix: &Matrix) -> f64 {
    let Some(chol) = matrix.clone().cholesky() else {
        return 0.0;
    };
    let inv = power_iteration(matrix.nrows(), |v| chol.solve(v), POWER_TOL, POWER_MAX_ITER);
    if inv.value <= 0.0 || !inv.value.is_finite() {
        0.0
    } else {
        1.0 / inv.value
    }
}

/// `‖A‖²` in operator 2-norm, i.e. the top eigenvalue of `AᵀA`.
pub fn operator_norm_sq(a: &Matrix) -> f64 {
    power_iteration(a.ncols(), |v| a.tr_mul(&(a * v)), POWER_TOL, POWER_MAX_ITER).value
}

/// Largest absolute difference between `A` and `Aᵀ`.
pub fn asymmetry(matrix: &Matrix) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..matrix.nrows() {
        for j in (i + 1)..matrix.ncols() {
            worst = worst.max((matrix[(i, j)] - matrix[(j, i)]).abs());
        }
    }
    worst
}

pub fn check_symmetric(matrix: &Matrix) -> Result<()> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::DimensionMismatch {
            expected: matrix.nrows(),
            got: matrix.ncols(),
        });
    }
    let scale = matrix.amax().max(f64::MIN_POSITIVE);
    let asym = asymmetry(matrix);
    if asym > 1e-12 * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

pub fn check_dim(v: &Vector, expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_extremes() {
        let m = Matrix::from_diagonal(&Vector::from_vec(vec![0.01, 0.3, 1.0]));
        assert!((largest_eigenvalue(&m) - 1.0).abs() < 1e-12);
        assert!((smallest_eigenvalue(&m) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_has_zero_smallest_eigenvalue() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(smallest_eigenvalue(&m), 0.0);
        assert!((largest_eigenvalue(&m) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn zero_operator() {
        let m = Matrix::zeros(3, 3);
        assert_eq!(largest_eigenvalue(&m), 0.0);
    }

    #[test]
    fn operator_norm_of_rectangular() {
        let a = Matrix::from_row_slice(3, 2, &[3.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert!((operator_norm_sq(&a) - 9.0).abs() < 1e-10);
    }

    #[test]
    fn asymmetric_rejected() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(
            check_symmetric(&m),
            Err(Error::NotSymmetric { .. })
        ));
    }
}
