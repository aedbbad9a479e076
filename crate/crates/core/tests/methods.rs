mod common;

use polyak::methods::{agm_step, IterateState, MomentumRule};
use polyak::oracles::{make_lasso, OptimalValue, Quadratic, RegularityClass, SmoothOracle};
use polyak::rates::{potential_value, Potential};
use polyak::{Error, Matrix, Vector};

use common::random_quadratic;

/// Same function, wrong `f*`.
struct Misspecified<'a> {
    inner: &'a Quadratic,
    f_star: f64,
}

impl SmoothOracle for Misspecified<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.inner.value(x)
    }
    fn gradient(&self, x: &Vector) -> Vector {
        self.inner.gradient(x)
    }
    fn class(&self) -> RegularityClass {
        self.inner.class()
    }
    fn optimum(&self) -> Option<OptimalValue> {
        Some(OptimalValue::exact(self.f_star))
    }
}

#[test]
fn underestimated_optimum_keeps_robust_contraction() {
    for seed in 0..10 {
        let (q, x0) = random_quadratic(15, seed);
        let c = q.class();
        let gap0 = q.value(&x0) - q.f_star().unwrap();
        let wrong = Misspecified {
            inner: &q,
            f_star: q.f_star().unwrap() - 0.1 * gap0,
        };
        for rule in [MomentumRule::AccVariantI, MomentumRule::AccVariantII] {
            let mut s = IterateState::accelerated(x0.clone());
            let v0 = potential_value(Potential::Robust, &q, &s.x, s.y()).unwrap();
            for k in 1..=300 {
                s = match agm_step(&wrong, &s, rule) {
                    Ok(step) => step.state,
                    Err(Error::GradientVanished { .. }) => break,
                    Err(e) => panic!("{e}"),
                };
                let v = potential_value(Potential::Robust, &q, &s.x, s.y()).unwrap();
                let bound = (1.0 - c.kappa()).powi(k) * v0;
                assert!(
                    v <= bound * (1.0 + 1e-10) + 1e-14 * v0,
                    "seed {seed} {rule:?} step {k}: {v} > {bound}"
                );
            }
        }
    }
}

#[test]
fn curvature_gap_matches_brute_force_minimum() {
    let a = Matrix::from_row_slice(3, 2, &[1.0, 0.3, -0.2, 0.8, 0.5, 0.1]);
    let b = Vector::from_vec(vec![0.7, -1.2, 0.4]);
    let lasso = make_lasso(a, b, 0.35).unwrap();
    let l = lasso.class().l();
    for x in [[0.0, 0.0], [0.4, -0.9], [-1.5, 2.0], [0.05, 0.02]] {
        let x = Vector::from_vec(x.to_vec());
        let (plus, g) = lasso.prox_gradient_point(&x);
        let model = |y: &Vector| {
            let d = y - &x;
            g.dot(&d) + 0.5 * l * d.norm_squared() + 0.35 * (y.abs().sum() - x.abs().sum())
        };
        // box around x; the model grows at most `slope·h` away from its minimizer
        let (n, half) = (1200, 3.0);
        let h = 2.0 * half / n as f64;
        let mut best = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let y = &x + Vector::from_vec(vec![-half + h * i as f64, -half + h * j as f64]);
                best = best.min(model(&y));
            }
        }
        let slope = g.norm() + l * 2.0 * half * 2f64.sqrt() + 0.35 * 2f64.sqrt();
        let closed = lasso.local_curvature_gap(&x);
        let grid = -2.0 * l * best;
        assert!(closed >= grid - 1e-12, "closed {closed} below grid {grid}");
        assert!(
            closed - grid <= 2.0 * l * slope * h,
            "closed {closed} vs grid {grid}"
        );
        assert!((&plus - &x).amax() < half);
        assert!(closed >= 0.0);
    }
}
