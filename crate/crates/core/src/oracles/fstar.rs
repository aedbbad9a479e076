use super::{CompositeOracle, Regularizer, SmoothOracle};
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::methods::{agm_step, prox_agm_step, IterateState, MomentumRule};

/// Result of an approximate minimization used to stand in for `f*`.
#[derive(Clone, Debug, PartialEq)]
pub struct FStarEstimate {
    /// Smallest objective value seen.
    pub value: f64,
    /// The stationary iterate when converged, else the best iterate.
    pub minimizer: Vector,
    /// Whether the stationarity tolerance was met within the budget.
    pub converged: bool,
    pub iterations: usize,
}

fn schedule(mu: f64) -> MomentumRule {
    if mu > 0.0 {
        MomentumRule::ConstMom(mu)
    } else {
        MomentumRule::NesterovSmooth
    }
}

/// Runs the accelerated method with constant momentum (or the smooth schedule
/// when `μ = 0`) until `‖∇f(y)‖² ≤ grad_tol` or `budget` iterations.
pub fn estimate_f_star<O: SmoothOracle + ?Sized>(
    oracle: &O,
    x0: &Vector,
    budget: usize,
    grad_tol: f64,
) -> Result<FStarEstimate> {
    linalg::check_dim(x0, oracle.dim())?;
    let rule = schedule(oracle.class().mu());
    let mut state = IterateState::accelerated(x0.clone());
    let mut best = (oracle.value(x0), x0.clone());
    for k in 0..=budget {
        let (f, g) = oracle.value_and_gradient(state.y());
        if !f.is_finite() {
            return Err(Error::NonFinite { iteration: k });
        }
        if f < best.0 {
            best = (f, state.y().clone());
        }
        if g.norm_squared() <= grad_tol {
            return Ok(FStarEstimate {
                value: best.0,
                minimizer: state.y().clone(),
                converged: true,
                iterations: k,
            });
        }
        if k == budget {
            break;
        }
        state = agm_step(oracle, &state, rule)?.state;
    }
    Ok(FStarEstimate {
        value: best.0,
        minimizer: best.1,
        converged: false,
        iterations: budget,
    })
}

/// Composite counterpart of [`estimate_f_star`]; stationarity is measured by
/// the local curvature gap `D(y, L)`.
pub fn estimate_f_star_composite<S, R>(
    composite: &CompositeOracle<S, R>,
    x0: &Vector,
    budget: usize,
    tol: f64,
) -> Result<FStarEstimate>
where
    S: SmoothOracle,
    R: Regularizer,
{
    linalg::check_dim(x0, composite.dim())?;
    let rule = schedule(composite.class().mu());
    let mut state = IterateState::accelerated(x0.clone());
    let mut best = (composite.value(x0), x0.clone());
    for k in 0..=budget {
        let f = composite.value(state.y());
        if !f.is_finite() {
            return Err(Error::NonFinite { iteration: k });
        }
        if f < best.0 {
            best = (f, state.y().clone());
        }
        if composite.local_curvature_gap(state.y()) <= tol {
            return Ok(FStarEstimate {
                value: best.0,
                minimizer: state.y().clone(),
                converged: true,
                iterations: k,
            });
        }
        if k == budget {
            break;
        }
        state = prox_agm_step(composite, &state, rule)?.state;
    }
    Ok(FStarEstimate {
        value: best.0,
        minimizer: best.1,
        converged: false,
        iterations: budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::oracles::{make_lasso, make_logistic, Quadratic};

    #[test]
    fn recovers_quadratic_optimum() {
        let q = Quadratic::diagonal(&[0.1, 1.0], Vector::from_vec(vec![1.0, -1.0])).unwrap();
        let est = estimate_f_star(&q, &Vector::zeros(2), 1000, 1e-24).unwrap();
        assert!(est.converged);
        assert!(est.value.abs() < 1e-20);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let q = Quadratic::diagonal(&[1e-4, 1.0], Vector::from_vec(vec![1.0, -1.0])).unwrap();
        let est = estimate_f_star(&q, &Vector::zeros(2), 3, 1e-30).unwrap();
        assert!(!est.converged);
        assert_eq!(est.iterations, 3);
    }

    #[test]
    fn logistic_estimate_is_stationary() {
        let a = Matrix::from_row_slice(4, 2, &[1.0, 0.5, -0.3, 1.0, 0.2, -1.0, -1.0, 0.1]);
        let b = Vector::from_vec(vec![1.0, -1.0, 1.0, -1.0]);
        let f = make_logistic(a, b, 0.05).unwrap();
        let est = estimate_f_star(&f, &Vector::zeros(2), 5000, 1e-26).unwrap();
        assert!(est.converged);
        let g = f.gradient(&est.minimizer).norm();
        assert!(g < 1e-12, "{g}");
    }

    #[test]
    fn lasso_closed_form() {
        let lasso = make_lasso(
            Matrix::identity(2, 2),
            Vector::from_vec(vec![3.0, 0.2]),
            1.0,
        )
        .unwrap();
        let est = estimate_f_star_composite(&lasso, &Vector::zeros(2), 1000, 1e-26).unwrap();
        assert!(est.converged);
        assert!((est.value - 2.52).abs() < 1e-12);
    }
}
