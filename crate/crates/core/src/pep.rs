//! One-iteration performance estimation for Polyak steps.
//!
//! For a gradient step with Polyak-type step size `γ`, the worst-case ratio
//! `‖x₁ − x*‖²/‖x₀ − x*‖²` over all functions of a class is relaxed to a
//! program in the Gram variables `X = ‖x₀ − x*‖²`, `G = ‖g₀‖²`,
//! `GX = g₀ᵀ(x* − x₀)` and `f₀ − f*`. Normalizing `X = 1` and eliminating
//! `f₀ − f*` through the step rule leaves a linear objective in `(GX, G)`
//! over two half-planes (the interpolation inequalities between `x₀` and
//! `x*`) and the parabola `G ≥ GX²`. The maximum lies on the boundary, so it
//! is found by enumerating KKT candidates in closed form.

use crate::certificates::{check_identity, CertificateReport, CheckOptions, IdentityTag};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::oracles::RegularityClass;
use crate::rates;

const FEAS_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PepRule {
    /// `γ = 2(f − f*)/‖g‖²`.
    VariantI,
    /// `γ = (f − f*)/‖g‖²`.
    RegularPolyak,
}

impl PepRule {
    // f − f* = s·γ·G
    fn gap_factor(self) -> f64 {
        match self {
            PepRule::VariantI => 0.5,
            PepRule::RegularPolyak => 1.0,
        }
    }

    /// Step sizes the rule can produce on the class.
    pub fn admissible_interval(self, class: RegularityClass) -> (f64, f64) {
        let s = self.gap_factor();
        let hi = if class.mu() > 0.0 {
            0.5 / (s * class.mu())
        } else {
            f64::INFINITY
        };
        (0.5 / (s * class.l()), hi)
    }

    pub fn name(self) -> &'static str {
        match self {
            PepRule::VariantI => "variant1",
            PepRule::RegularPolyak => "polyak",
        }
    }
}

/// Gram variables of a worst case, normalized to `x = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PepVars {
    pub x: f64,
    pub g: f64,
    pub gx: f64,
    pub fgap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// Interpolation inequality from `x₀` to `x*`.
    ToOptimum,
    /// Interpolation inequality from `x*` to `x₀`.
    FromOptimum,
    /// `X·G ≥ GX²`.
    Gram,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PepSolution {
    pub objective: f64,
    pub vars: PepVars,
    pub active: Vec<Constraint>,
    pub gamma: f64,
}

/// Coefficients of the reduced program: constraints `a·GX + b·G + c ≤ 0`
/// and objective `1 + 2γ·GX + γ²·G`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reduced {
    pub to_opt: (f64, f64),
    pub from_opt: (f64, f64),
    pub c: f64,
    pub gamma: f64,
    pub gap_factor: f64,
}

impl Reduced {
    pub fn new(class: RegularityClass, gamma: f64, rule: PepRule) -> Self {
        let (mu, l) = (class.mu(), class.l());
        let c = mu * l / (2.0 * (l - mu));
        let s = rule.gap_factor();
        let base = 1.0 / (2.0 * l) + c / (l * l);
        Self {
            to_opt: (1.0 + 2.0 * c / l, s * gamma + base),
            from_opt: (2.0 * c / l, -s * gamma + base),
            c,
            gamma,
            gap_factor: s,
        }
    }

    pub fn objective(&self, gx: f64, g: f64) -> f64 {
        1.0 + 2.0 * self.gamma * gx + self.gamma * self.gamma * g
    }

    /// Largest constraint violation at `(gx, g)`, relative to the size of the
    /// terms involved.
    pub fn violation(&self, gx: f64, g: f64) -> f64 {
        let lin = |(a, b): (f64, f64)| {
            let v = a * gx + b * g + self.c;
            v / (1.0 + (a * gx).abs() + (b * g).abs() + self.c)
        };
        let gram = (gx * gx - g) / (1.0 + g.abs());
        lin(self.to_opt).max(lin(self.from_opt)).max(gram)
    }
}

// roots of b t² + a t + c = 0
fn parabola_hits(a: f64, b: f64, c: f64) -> Vec<f64> {
    if b.abs() <= 1e-300 {
        return if a != 0.0 { vec![-c / a] } else { vec![] };
    }
    let disc = a * a - 4.0 * b * c;
    if disc < 0.0 {
        // tangency lost to rounding still yields a candidate
        if disc > -1e-12 * a * a {
            return vec![-a / (2.0 * b)];
        }
        return vec![];
    }
    let sq = disc.sqrt();
    // stable pair
    let q = -0.5 * (a + a.signum() * sq);
    let mut out = Vec::with_capacity(2);
    if q != 0.0 {
        out.push(q / b);
        out.push(c / q);
    } else {
        out.push(0.0);
    }
    out
}

/// Worst-case one-step ratio `max ‖x₁ − x*‖²/‖x₀ − x*‖²` for the rule at step
/// size `γ`.
pub fn solve_rho_of_gamma(
    class: RegularityClass,
    gamma: f64,
    rule: PepRule,
) -> Result<PepSolution> {
    if class.mu() <= 0.0 {
        return Err(Error::InvalidParameter(
            "performance estimation needs mu > 0".to_string(),
        ));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Infeasible { gamma });
    }
    let red = Reduced::new(class, gamma, rule);
    let mut cands: Vec<(f64, f64, Vec<Constraint>)> = Vec::new();

    let (a1, b1) = red.to_opt;
    let (a2, b2) = red.from_opt;
    let det = a1 * b2 - a2 * b1;
    if det.abs() > 1e-300 {
        let gx = red.c * (b1 - b2) / det;
        let g = red.c * (a2 - a1) / det;
        cands.push((gx, g, vec![Constraint::ToOptimum, Constraint::FromOptimum]));
    }
    for (coef, tag) in [
        (red.to_opt, Constraint::ToOptimum),
        (red.from_opt, Constraint::FromOptimum),
    ] {
        for t in parabola_hits(coef.0, coef.1, red.c) {
            cands.push((t, t * t, vec![tag, Constraint::Gram]));
        }
    }

    let mut best: Option<(f64, f64, f64, Vec<Constraint>)> = None;
    for (gx, g, mut active) in cands {
        if !(gx.is_finite() && g.is_finite()) || red.violation(gx, g) > FEAS_TOL {
            continue;
        }
        if !active.contains(&Constraint::Gram) && (gx * gx - g).abs() <= FEAS_TOL * (1.0 + g) {
            active.push(Constraint::Gram);
        }
        let obj = red.objective(gx, g);
        let better = match &best {
            None => true,
            Some((bo, bgx, bg, _)) => {
                let scale = FEAS_TOL * bo.abs().max(1.0);
                obj > bo + scale
                    || ((obj - bo).abs() <= scale && gx * gx + g * g < bgx * bgx + bg * bg)
            }
        };
        if better {
            best = Some((obj, gx, g, active));
        }
    }
    let (objective, gx, g, active) = best.ok_or(Error::Infeasible { gamma })?;
    Ok(PepSolution {
        objective,
        vars: PepVars {
            x: 1.0,
            g,
            gx,
            fgap: red.gap_factor * gamma * g,
        },
        active,
        gamma,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub rule: PepRule,
    /// `(γ, ρ(γ))` on a uniform grid of the admissible interval.
    pub points: Vec<(f64, f64)>,
    pub argmax: f64,
    pub max: f64,
}

/// Evaluates the worst case on `grid ≥ 2` uniformly spaced step sizes over
/// the rule's admissible interval, then refines the maximum by golden-section
/// search around the best grid point.
pub fn sweep_gamma(
    class: RegularityClass,
    rule: PepRule,
    grid: usize,
    exec: Execution,
) -> Result<Sweep> {
    if grid < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid size {grid} must be >= 2"
        )));
    }
    let (lo, hi) = rule.admissible_interval(class);
    if !hi.is_finite() {
        return Err(Error::InvalidParameter(
            "performance estimation needs mu > 0".to_string(),
        ));
    }
    let at = |i: usize| {
        if i + 1 == grid {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (grid - 1) as f64
        }
    };
    let values = exec.map_range(grid, |i| {
        solve_rho_of_gamma(class, at(i), rule).map(|s| s.objective)
    });
    let mut points = Vec::with_capacity(grid);
    for (i, v) in values.into_iter().enumerate() {
        points.push((at(i), v?));
    }
    let (best_i, &(mut argmax, mut max)) = points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("grid is nonempty");
    let (a, b) = (at(best_i.saturating_sub(1)), at((best_i + 1).min(grid - 1)));
    let eval =
        |g: f64| solve_rho_of_gamma(class, g, rule).map_or(f64::NEG_INFINITY, |s| s.objective);
    let (x, v) = rates::golden_section_max(eval, a, b, rates::MAX_RATE_REFINE);
    if v > max {
        argmax = x;
        max = v;
    }
    Ok(Sweep {
        rule,
        points,
        argmax,
        max,
    })
}

/// Checks the weighted-sum certificate of the Variant I rate at `γ` strictly
/// inside `(1/L, 1/μ)`.
pub fn verify_certificate_multipliers(
    class: RegularityClass,
    gamma: f64,
    opts: &CheckOptions,
) -> Result<CertificateReport> {
    check_identity(IdentityTag::VariantIDistance, class, gamma, opts)
}
