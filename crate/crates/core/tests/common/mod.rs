#![allow(dead_code)]

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use polyak::oracles::{Quadratic, RegularityClass};
use polyak::{Matrix, Vector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(n: usize, rng: &mut ChaCha8Rng) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(n, n, |_, _| rng.sample(StandardNormal))
        .qr()
        .q()
}

/// `Q diag(λ) Qᵀ` with a random rotation, symmetrized.
pub fn rotated(eigenvalues: &[f64], rng: &mut ChaCha8Rng) -> Matrix {
    let q = orthogonal(eigenvalues.len(), rng);
    let h = &q * Matrix::from_diagonal(&Vector::from_column_slice(eigenvalues)) * q.transpose();
    (&h + h.transpose()) * 0.5
}

/// Quadratic on `R^n` with `L = 1`, `μ = κ` log-uniform in `[1e-3, 1e-1]`,
/// spectrum containing both extremes, random centre and start point.
pub fn random_quadratic(n: usize, seed: u64) -> (Quadratic, Vector) {
    let mut r = rng(seed);
    let kappa = 10f64.powf(r.random_range(-3.0..=-1.0));
    strongly_convex(n, kappa, &mut r)
}

pub fn strongly_convex(n: usize, kappa: f64, r: &mut ChaCha8Rng) -> (Quadratic, Vector) {
    let mut eig = vec![1.0, kappa];
    eig.extend((2..n).map(|_| kappa.powf(r.random_range(0.0..1.0))));
    build(&eig, RegularityClass::new(kappa, 1.0).unwrap(), r)
}

/// Convex quadratic (one zero eigenvalue), class `(0, 1)`.
pub fn convex_quadratic(n: usize, seed: u64) -> (Quadratic, Vector) {
    let mut r = rng(seed);
    let mut eig = vec![1.0, 0.0];
    eig.extend((2..n).map(|_| r.random_range(0.0..1.0)));
    build(&eig, RegularityClass::new(0.0, 1.0).unwrap(), &mut r)
}

fn build(eig: &[f64], class: RegularityClass, r: &mut ChaCha8Rng) -> (Quadratic, Vector) {
    let h = rotated(eig, r);
    let center = gaussian_vector(eig.len(), r);
    let x0 = gaussian_vector(eig.len(), r);
    (Quadratic::with_class(h, center, class).unwrap(), x0)
}

pub fn extreme_eigenvalues(m: &Matrix) -> (f64, f64) {
    let e = SymmetricEigen::new(m.clone());
    (e.eigenvalues.min(), e.eigenvalues.max())
}
