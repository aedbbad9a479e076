//! Worst-case rate formulas, potential functions and the two-regime bound for
//! the accelerated method with running-minimum momentum.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::methods::RunTrace;
use crate::oracles::{RegularityClass, SmoothOracle};

/// Smallest `μ/L` accepted by [`regime_bound`]; below it `√(L/(2μ))` loses
/// too many digits.
pub const MIN_KAPPA: f64 = 1e-12;
/// Grid size used by [`max_rate`] before refinement.
pub const MAX_RATE_GRID: usize = 10_000;
/// Golden-section steps used by [`max_rate`].
pub const MAX_RATE_REFINE: usize = 60;

const DOMAIN_SLACK: f64 = 1e-12;

/// One-step rate as a function of a step size or a momentum estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateFormula {
    /// Distance contraction of Variant I:
    /// `ρ(γ) = (γL − 1)(1 − γμ)/(γ(L + μ) − 1)` on `[1/L, 1/μ]`.
    VariantI(RegularityClass),
    /// Gap contraction of Variant II:
    /// `ρ(γ) = (Lγ − 1)(Lγ(3 − γ(L + μ)) − 1)` on `[1/L, (2L − μ)/L²]`.
    VariantII(RegularityClass),
    /// Potential contraction with momentum estimate `μ̃`: `1/(1 + μ̃/L)` on `(0, L]`.
    Adaptive(RegularityClass),
}

impl RateFormula {
    pub fn class(&self) -> RegularityClass {
        match *self {
            RateFormula::VariantI(c) | RateFormula::VariantII(c) | RateFormula::Adaptive(c) => c,
        }
    }

    /// Interval of admissible arguments.
    pub fn domain(&self) -> (f64, f64) {
        let c = self.class();
        let (mu, l) = (c.mu(), c.l());
        match self {
            RateFormula::VariantI(_) => (1.0 / l, if mu > 0.0 { 1.0 / mu } else { f64::INFINITY }),
            RateFormula::VariantII(_) => (1.0 / l, (2.0 * l - mu) / (l * l)),
            RateFormula::Adaptive(_) => (0.0, l),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            RateFormula::VariantI(_) => "variant I step",
            RateFormula::VariantII(_) => "variant II step",
            RateFormula::Adaptive(_) => "momentum estimate",
        }
    }
}

/// Evaluates `formula` at `arg`; arguments outside the domain (up to a
/// `1e-12` relative slack) are rejected.
pub fn rate_value(formula: RateFormula, arg: f64) -> Result<f64> {
    let (lo, hi) = formula.domain();
    let slack = DOMAIN_SLACK * hi.abs().min(1e300).max(lo.abs());
    let open_left = matches!(formula, RateFormula::Adaptive(_));
    let below = if open_left {
        arg <= lo
    } else {
        arg < lo - slack
    };
    if !arg.is_finite() || below || arg > hi + slack {
        return Err(Error::Domain {
            what: formula.name(),
            value: arg,
            lo,
            hi,
        });
    }
    let c = formula.class();
    let (mu, l) = (c.mu(), c.l());
    let g = arg;
    Ok(match formula {
        RateFormula::VariantI(_) => {
            let d = g * (l + mu) - 1.0;
            if d <= 0.0 {
                // only reachable at γ = 1/L with μ = 0, where the rate is 0
                0.0
            } else {
                (g * l - 1.0) * (1.0 - g * mu) / d
            }
        }
        RateFormula::VariantII(_) => (l * g - 1.0) * (l * g * (3.0 - g * (l + mu)) - 1.0),
        RateFormula::Adaptive(_) => 1.0 / (1.0 + g / l),
    })
}

/// `((L − μ)/(L + μ))²`, the worst case of both gradient variants, attained
/// at `γ* = 2/(L + μ)`.
pub fn variant_worst_case(class: RegularityClass) -> f64 {
    let r = (class.l() - class.mu()) / (class.l() + class.mu());
    r * r
}

/// `2/(L + μ)`.
pub fn worst_case_step(class: RegularityClass) -> f64 {
    2.0 / (class.l() + class.mu())
}

/// `(L² − Lμ + μ²)/(L + μ)²`, the worst case of the regular Polyak step.
pub fn regular_polyak_worst_case(class: RegularityClass) -> f64 {
    let (mu, l) = (class.mu(), class.l());
    (l * l - l * mu + mu * mu) / ((l + mu) * (l + mu))
}

/// `ρ₁ = 1/(1 + κ^{3/4})`.
pub fn rho1(class: RegularityClass) -> f64 {
    1.0 / (1.0 + class.kappa().powf(0.75))
}

/// `ρ₂ = 1/(1 + √κ)`.
pub fn rho2(class: RegularityClass) -> f64 {
    1.0 / (1.0 + class.kappa().sqrt())
}

/// `C = (1/ρ₁ − 1)(1 + √(L/(2μ)))² + 1`.
pub fn regime_constant(class: RegularityClass) -> f64 {
    let s = 1.0 + (class.l() / (2.0 * class.mu())).sqrt();
    (1.0 / rho1(class) - 1.0) * s * s + 1.0
}

/// `β` for momentum estimate `μ̃`: `(√L − √μ̃)/(√L + √μ̃)`.
fn beta_of(mu_tilde: f64, l: f64) -> f64 {
    crate::methods::momentum_from_estimate(mu_tilde, l)
}

/// Momentum interval `[(√L − ⁴√(Lμ))/(√L + ⁴√(Lμ)), (√L − √μ)/(√L + √μ)]` on
/// which the shifted potential contracts by `ρ₁`.
pub fn shifted_bracket(class: RegularityClass) -> (f64, f64) {
    let (mu, l) = (class.mu(), class.l());
    (beta_of((l * mu).sqrt(), l), beta_of(mu, l))
}

/// Maximizes a concave `f` on `[lo, hi]`: a uniform grid of
/// [`MAX_RATE_GRID`] points followed by [`MAX_RATE_REFINE`] golden-section
/// steps around the best grid point. Returns `(argmax, max)`.
pub fn max_rate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    let n = MAX_RATE_GRID;
    let h = (hi - lo) / (n - 1) as f64;
    let at = |i: usize| if i + 1 == n { hi } else { lo + h * i as f64 };
    let (mut best_i, mut best) = (0, f(lo));
    for i in 1..n {
        let v = f(at(i));
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let (a, b) = (at(best_i.saturating_sub(1)), at((best_i + 1).min(n - 1)));
    let (x, v) = golden_section_max(&f, a, b, MAX_RATE_REFINE);
    if v > best {
        (x, v)
    } else {
        (at(best_i), best)
    }
}

/// `steps` golden-section iterations for the maximum of a unimodal `f` on
/// `[a, b]`. Returns the better of the two final probes.
pub fn golden_section_max<F: Fn(f64) -> f64>(
    f: F,
    mut a: f64,
    mut b: f64,
    steps: usize,
) -> (f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..steps {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// First iteration at which the running-minimum estimate drops to `√(Lμ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwitchPoint {
    At(usize),
    Never,
}

impl SwitchPoint {
    /// Switch point as seen by a bound at horizon `n`: switches at or after
    /// `n` do not affect the first `n` iterations.
    pub fn within(self, n: usize) -> SwitchPoint {
        match self {
            SwitchPoint::At(m) if m < n => SwitchPoint::At(m),
            _ => SwitchPoint::Never,
        }
    }
}

/// Switch points read off a trace: from the unclamped ratio at `yₖ₊₁` and
/// from the estimate actually used.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DetectedSwitch {
    pub raw: SwitchPoint,
    pub used: SwitchPoint,
}

pub fn detect_switch(trace: &RunTrace, class: RegularityClass) -> DetectedSwitch {
    let threshold = (class.l() * class.mu()).sqrt();
    let first = |pick: fn(&crate::methods::TraceRow) -> Option<f64>| {
        trace
            .rows
            .iter()
            .find(|r| pick(r).is_some_and(|v| v <= threshold))
            .map_or(SwitchPoint::Never, |r| SwitchPoint::At(r.k))
    };
    DetectedSwitch {
        raw: first(|r| r.mu_tilde_raw),
        used: first(|r| r.step_or_mu),
    }
}

/// Bound on `f(y_N) − f*` for the accelerated method with running-minimum
/// momentum, given the switch point `m`:
///
/// * `m = 0`: `ρ₁ᴺ (L/2 (1/√ρ₁ − √ρ₁)² ‖x₀ − x*‖² + gap₀)`,
/// * never: `ρ₂ᴺ gap₀`,
/// * otherwise: `C ρ₁^{N−m} ρ₂^m gap₀`.
///
/// `dist0_sq` is needed only when `m = 0`.
pub fn regime_bound(
    class: RegularityClass,
    n: usize,
    m: SwitchPoint,
    gap0: f64,
    dist0_sq: Option<f64>,
) -> Result<f64> {
    let kappa = class.kappa();
    if kappa < MIN_KAPPA {
        return Err(Error::Domain {
            what: "inverse condition number",
            value: kappa,
            lo: MIN_KAPPA,
            hi: 1.0,
        });
    }
    let (r1, r2) = (rho1(class), rho2(class));
    match m {
        SwitchPoint::Never => Ok(r2.powi(n as i32) * gap0),
        SwitchPoint::At(0) => {
            let d = dist0_sq.ok_or(Error::MissingMinimizer)?;
            let s = 1.0 / r1.sqrt() - r1.sqrt();
            Ok(r1.powi(n as i32) * (0.5 * class.l() * s * s * d + gap0))
        }
        SwitchPoint::At(m) if m <= n => {
            Ok(regime_constant(class) * r1.powi((n - m) as i32) * r2.powi(m as i32) * gap0)
        }
        SwitchPoint::At(m) => Err(Error::Domain {
            what: "switch iteration",
            value: m as f64,
            lo: 0.0,
            hi: n as f64,
        }),
    }
}

/// Lyapunov functions of the accelerated method.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Potential {
    /// `(L − μ)/2 ‖x − y‖² + f(y) − f*`; contracts by `1 − μ/L` for any `β ∈ [0, 1]`.
    Robust,
    /// `L/2 ‖x − y‖² + f(y) − f*`; contracts by `1/(1 + μ̃/L)`.
    Adaptive,
    /// `L/2 ‖(x − x*)/√ρ₁ − √ρ₁(y − x*)‖² + f(y) − f*`; contracts by `ρ₁`
    /// inside [`shifted_bracket`].
    Shifted,
}

/// `L/2 ‖(x − x*)/√ρ − √ρ(y − x*)‖² + gap_y`.
pub fn shifted_potential(
    rho: f64,
    l: f64,
    x: &Vector,
    y: &Vector,
    gap_y: f64,
    x_star: &Vector,
) -> f64 {
    let s = rho.sqrt();
    let v = (x - x_star) / s - (y - x_star) * s;
    0.5 * l * v.norm_squared() + gap_y
}

/// Potential from precomputed `f(y) − f*`; `None` when the potential needs
/// `x*` and none is given.
pub fn potential_from_gap(
    p: Potential,
    class: RegularityClass,
    x: &Vector,
    y: &Vector,
    gap_y: f64,
    x_star: Option<&Vector>,
) -> Option<f64> {
    let l = class.l();
    match p {
        Potential::Robust => Some(0.5 * (l - class.mu()) * (x - y).norm_squared() + gap_y),
        Potential::Adaptive => Some(0.5 * l * (x - y).norm_squared() + gap_y),
        Potential::Shifted => x_star.map(|xs| shifted_potential(rho1(class), l, x, y, gap_y, xs)),
    }
}

/// Evaluates `p` at `(x, y)` on `oracle`, which must carry `f*` (and `x*` for
/// [`Potential::Shifted`]).
pub fn potential_value<O: SmoothOracle + ?Sized>(
    p: Potential,
    oracle: &O,
    x: &Vector,
    y: &Vector,
) -> Result<f64> {
    let f_star = oracle.f_star().ok_or(Error::MissingFStar)?;
    let gap = oracle.value(y) - f_star;
    potential_from_gap(p, oracle.class(), x, y, gap, oracle.x_star()).ok_or(Error::MissingMinimizer)
}
