//! Sign conditions behind the shifted-potential certificate, written in the
//! variable `x = κ^{1/4}`.

use super::identities::shifted_p3;
use super::SIGN_TOL;
use crate::oracles::RegularityClass;
use crate::rates;

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// `−x⁸ + 4x⁷ − 8x⁶ + 9x⁵ − 4x⁴ − 4x³ + 9x² − 8x + 4`.
pub fn p1(x: f64) -> f64 {
    horner(&[-1.0, 4.0, -8.0, 9.0, -4.0, -4.0, 9.0, -8.0, 4.0], x)
}

/// `−x¹¹ + 2x⁹ − 3x⁸ − x⁷ + 6x⁶ − 3x⁵ − 3x⁴ + 6x³ − 3x + 4`.
pub fn p2(x: f64) -> f64 {
    horner(
        &[
            -1.0, 0.0, 2.0, -3.0, -1.0, 6.0, -3.0, -3.0, 6.0, 0.0, -3.0, 4.0,
        ],
        x,
    )
}

/// `x⁸ − x⁷ + 2x⁶ + 3x⁵ − 7x⁴ + 5x³ + 4x² − 7x + 4`.
pub fn p4(x: f64) -> f64 {
    horner(&[1.0, -1.0, 2.0, 3.0, -7.0, 5.0, 4.0, -7.0, 4.0], x)
}

fn common_denominator(x: f64) -> f64 {
    (1.0 + x).powi(3) * (1.0 - x + x * x).powi(3)
}

/// Closed form of `p₃` at the lower end of the bracket,
/// `(1 − √κ + κ^{3/4})κ^{7/4}/((1 + κ^{1/4})³(1 − κ^{1/4} + √κ)³)`.
pub fn p3_closed_lower(kappa: f64) -> f64 {
    let x = kappa.powf(0.25);
    (1.0 - x * x + x.powi(3)) * x.powi(7) / common_denominator(x)
}

/// Closed form of `p₃` at the upper end of the bracket,
/// `κ^{3/2} p₄(κ^{1/4})/((1 + κ^{1/4})³(1 + √κ)²(1 − κ^{1/4} + √κ)³)`.
pub fn p3_closed_upper(kappa: f64) -> f64 {
    let x = kappa.powf(0.25);
    x.powi(6) * p4(x) / (common_denominator(x) * (1.0 + x * x).powi(2))
}

/// `ρ³ − β²` and `p₃` at the two ends of the bracket for `κ`.
fn bracket_values(kappa: f64) -> [(f64, f64); 2] {
    let rho = 1.0 / (1.0 + kappa.powf(0.75));
    let q = kappa.powf(0.25);
    let lower = (1.0 - q) / (1.0 + q);
    let upper = (1.0 - kappa.sqrt()) / (1.0 + kappa.sqrt());
    [lower, upper].map(|b| (rho.powi(3) - b * b, shifted_p3(kappa, b, rho)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolynomialReport {
    pub grid: usize,
    pub min_p1: f64,
    pub min_p2: f64,
    pub min_p4: f64,
    /// Minimum of `p₃` at the lower end of the bracket over `κ ∈ [0, 1]`.
    pub min_p3_lower: f64,
    /// Minimum of `p₃` at the upper end of the bracket over `κ ∈ [0, 1]`.
    pub min_p3_upper: f64,
}

impl PolynomialReport {
    pub fn min(&self) -> f64 {
        [
            self.min_p1,
            self.min_p2,
            self.min_p4,
            self.min_p3_lower,
            self.min_p3_upper,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }

    pub fn passed(&self) -> bool {
        self.min() >= -SIGN_TOL
    }
}

/// Minima of `p₁`, `p₂`, `p₄` and of the two `p₃` end values over a uniform
/// grid of `grid ≥ 2` points on `[0, 1]`.
pub fn check_polynomials(grid: usize) -> PolynomialReport {
    let grid = grid.max(2);
    let mut r = PolynomialReport {
        grid,
        min_p1: f64::INFINITY,
        min_p2: f64::INFINITY,
        min_p4: f64::INFINITY,
        min_p3_lower: f64::INFINITY,
        min_p3_upper: f64::INFINITY,
    };
    for i in 0..grid {
        let t = i as f64 / (grid - 1) as f64;
        r.min_p1 = r.min_p1.min(p1(t));
        r.min_p2 = r.min_p2.min(p2(t));
        r.min_p4 = r.min_p4.min(p4(t));
        let [(_, lo), (_, hi)] = bracket_values(t);
        r.min_p3_lower = r.min_p3_lower.min(lo);
        r.min_p3_upper = r.min_p3_upper.min(hi);
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketReport {
    pub kappas: usize,
    /// Minimum of `ρ₁³ − β²` over the bracket points.
    pub min_gap: f64,
    /// Minimum of `p₃` over the bracket points.
    pub min_p3: f64,
}

impl BracketReport {
    pub fn passed(&self) -> bool {
        self.min_gap >= -SIGN_TOL && self.min_p3 >= -SIGN_TOL
    }
}

/// Checks `ρ₁³ − β² ≥ 0` and `p₃ ≥ 0` at both ends of the shifted bracket and
/// at 100 interior momenta for every `κ` in `kappas ⊂ (0, 1]`.
pub fn check_shifted_bracket(kappas: &[f64]) -> BracketReport {
    let mut r = BracketReport {
        kappas: kappas.len(),
        min_gap: f64::INFINITY,
        min_p3: f64::INFINITY,
    };
    for &kappa in kappas {
        let rho = 1.0 / (1.0 + kappa.powf(0.75));
        let (lo, hi) = if kappa < 1.0 {
            rates::shifted_bracket(RegularityClass::new(kappa, 1.0).expect("kappa in (0, 1)"))
        } else {
            (0.0, 0.0)
        };
        for j in 0..102 {
            let b = lo + (hi - lo) * j as f64 / 101.0;
            r.min_gap = r.min_gap.min(rho.powi(3) - b * b);
            r.min_p3 = r.min_p3.min(shifted_p3(kappa, b, rho));
        }
    }
    r
}
