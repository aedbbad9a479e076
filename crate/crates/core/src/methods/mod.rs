//! Gradient methods with Polyak steps and accelerated methods with Polyak
//! momentum.
//!
//! Single steps are exposed as [`polyak_gd_step`], [`agm_step`] and
//! [`prox_agm_step`]; [`run`] and [`run_composite`] iterate them and record a
//! [`RunTrace`].

mod run;
mod trace;

use std::fmt;
use std::str::FromStr;

pub use run::{run, run_composite, RunOptions, StopRule};
pub use trace::{Iterate, RunTrace, Termination, TraceRow};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::oracles::{CompositeOracle, RegularityClass, Regularizer, SmoothOracle};

/// Gap below which an iterate counts as optimal, relative to `max(1, |f*|)`.
pub const GAP_GUARD: f64 = 1e-14;
/// Squared gradient norm below which an iterate counts as optimal, relative
/// to `max(1, L²)`.
pub const GRAD_GUARD: f64 = 1e-28;
/// Lower clamp for momentum estimates, relative to `L`.
pub const MU_TILDE_FLOOR: f64 = 1e-16;

/// Step-size policy for the gradient method `x⁺ = x − γ∇f(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    /// `γ = (f(x) − f*)/‖∇f(x)‖²`.
    RegularPolyak,
    /// `γ = 2(f(x) − f*)/‖∇f(x)‖²`.
    VariantI,
    /// `γ = (2 − ‖∇f(x)‖²/(2L(f(x) − f*)))/L`.
    VariantII,
    Fixed(f64),
}

impl StepRule {
    pub fn needs_f_star(&self) -> bool {
        !matches!(self, StepRule::Fixed(_))
    }

    /// Interval the step sizes of this rule stay in for functions of `class`.
    pub fn step_interval(&self, class: RegularityClass) -> (f64, f64) {
        let (mu, l) = (class.mu(), class.l());
        let upper = |num: f64| if mu > 0.0 { num / mu } else { f64::INFINITY };
        match *self {
            StepRule::RegularPolyak => (0.5 / l, upper(0.5)),
            StepRule::VariantI => (1.0 / l, upper(1.0)),
            StepRule::VariantII => (1.0 / l, (2.0 - mu / l) / l),
            StepRule::Fixed(g) => (g, g),
        }
    }
}

/// Momentum policy for the accelerated method; sets `μ̃ₖ` and hence
/// `βₖ = (√L − √μ̃ₖ)/(√L + √μ̃ₖ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MomentumRule {
    /// `μ̃ₖ = μ`.
    ConstMom(f64),
    /// `μ̃ₖ = ‖∇f(yₖ₊₁)‖²/(2(f(yₖ₊₁) − f*))`.
    AccVariantI,
    /// Running minimum of the Variant I estimate.
    AccVariantII,
    /// Smooth (non strongly convex) schedule `βₖ = (tₖ − 1)/tₖ₊₁`,
    /// `tₖ₊₁ = (1 + √(1 + 4tₖ²))/2`, `t₀ = 1`.
    NesterovSmooth,
}

impl MomentumRule {
    pub fn is_adaptive(&self) -> bool {
        matches!(self, MomentumRule::AccVariantI | MomentumRule::AccVariantII)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Gradient(StepRule),
    Accelerated(MomentumRule),
}

/// Method names accepted by the experiment harness. `gd` and `agm` read their
/// parameters (`1/L`, `μ`) from the problem's class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodSpec {
    Gd,
    Polyak,
    VariantI,
    VariantII,
    Agm,
    AgmSmooth,
    AccI,
    AccII,
}

impl MethodSpec {
    pub const ALL: [MethodSpec; 8] = [
        MethodSpec::Gd,
        MethodSpec::Polyak,
        MethodSpec::VariantI,
        MethodSpec::VariantII,
        MethodSpec::Agm,
        MethodSpec::AgmSmooth,
        MethodSpec::AccI,
        MethodSpec::AccII,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Gd => "gd",
            MethodSpec::Polyak => "polyak",
            MethodSpec::VariantI => "variant1",
            MethodSpec::VariantII => "variant2",
            MethodSpec::Agm => "agm",
            MethodSpec::AgmSmooth => "agm_smooth",
            MethodSpec::AccI => "acc1",
            MethodSpec::AccII => "acc2",
        }
    }

    pub fn resolve(&self, class: RegularityClass) -> Method {
        match self {
            MethodSpec::Gd => Method::Gradient(StepRule::Fixed(1.0 / class.l())),
            MethodSpec::Polyak => Method::Gradient(StepRule::RegularPolyak),
            MethodSpec::VariantI => Method::Gradient(StepRule::VariantI),
            MethodSpec::VariantII => Method::Gradient(StepRule::VariantII),
            MethodSpec::Agm => Method::Accelerated(MomentumRule::ConstMom(class.mu())),
            MethodSpec::AgmSmooth => Method::Accelerated(MomentumRule::NesterovSmooth),
            MethodSpec::AccI => Method::Accelerated(MomentumRule::AccVariantI),
            MethodSpec::AccII => Method::Accelerated(MomentumRule::AccVariantII),
        }
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        MethodSpec::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// Iterate of a method: `x` only for gradient methods, `(x, y)` for the
/// accelerated ones.
#[derive(Clone, Debug, PartialEq)]
pub struct IterateState {
    pub x: Vector,
    pub y: Option<Vector>,
    pub k: usize,
    pub mu_tilde_prev: Option<f64>,
    pub nesterov_t: f64,
}

impl IterateState {
    pub fn gradient(x0: Vector) -> Self {
        Self {
            x: x0,
            y: None,
            k: 0,
            mu_tilde_prev: None,
            nesterov_t: 1.0,
        }
    }

    /// `y₀ = x₀`.
    pub fn accelerated(x0: Vector) -> Self {
        Self {
            y: Some(x0.clone()),
            ..Self::gradient(x0)
        }
    }

    pub fn y(&self) -> &Vector {
        self.y.as_ref().unwrap_or(&self.x)
    }
}

#[derive(Clone, Debug)]
pub struct GdStep {
    pub x_next: Vector,
    pub gamma: f64,
}

#[derive(Clone, Debug)]
pub struct AgmStep {
    pub state: IterateState,
    /// `μ̃ₖ` after clamping; `None` for schedules not driven by an estimate.
    pub mu_tilde: Option<f64>,
    /// Unclamped ratio at `yₖ₊₁` for adaptive rules.
    pub mu_tilde_raw: Option<f64>,
    pub beta: f64,
    pub clamped: bool,
    /// `f(yₖ₊₁)` and `∇f(yₖ₊₁)` when the rule evaluated them.
    pub y_eval: Option<(f64, Vector)>,
}

fn gap_is_zero(gap: f64, f_star: f64) -> bool {
    gap <= GAP_GUARD * f_star.abs().max(1.0)
}

fn grad_is_zero(grad_sq: f64, l: f64) -> bool {
    grad_sq <= GRAD_GUARD * (l * l).max(1.0)
}

pub(crate) fn step_size(
    rule: StepRule,
    class: RegularityClass,
    gap: f64,
    grad_sq: f64,
    f_star: f64,
    iteration: usize,
) -> Result<f64> {
    let l = class.l();
    if grad_is_zero(grad_sq, l) || (rule.needs_f_star() && gap_is_zero(gap, f_star)) {
        return Err(Error::GradientVanished { iteration });
    }
    Ok(match rule {
        StepRule::RegularPolyak => gap / grad_sq,
        StepRule::VariantI => 2.0 * gap / grad_sq,
        StepRule::VariantII => (2.0 - grad_sq / (2.0 * l * gap)) / l,
        StepRule::Fixed(g) => g,
    })
}

/// One gradient step `x⁺ = x − γ∇f(x)` with `γ` from `rule`.
pub fn polyak_gd_step<O: SmoothOracle + ?Sized>(
    oracle: &O,
    x: &Vector,
    rule: StepRule,
) -> Result<GdStep> {
    crate::linalg::check_dim(x, oracle.dim())?;
    let f_star = match rule {
        StepRule::Fixed(_) => oracle.f_star().unwrap_or(f64::NEG_INFINITY),
        _ => oracle.f_star().ok_or(Error::MissingFStar)?,
    };
    let (f, g) = oracle.value_and_gradient(x);
    let gamma = step_size(
        rule,
        oracle.class(),
        f - f_star,
        g.norm_squared(),
        f_star,
        0,
    )?;
    Ok(GdStep {
        x_next: x - gamma * g,
        gamma,
    })
}

/// `β = (√L − √μ̃)/(√L + √μ̃)`.
pub fn momentum_from_estimate(mu_tilde: f64, l: f64) -> f64 {
    let (a, b) = (l.sqrt(), mu_tilde.max(0.0).sqrt());
    (a - b) / (a + b)
}

struct Momentum {
    mu_tilde: Option<f64>,
    raw: Option<f64>,
    beta: f64,
    clamped: bool,
    next_t: f64,
}

// `ratio` evaluates the unclamped adaptive estimate at y_{k+1}.
fn momentum<F>(rule: MomentumRule, state: &IterateState, l: f64, ratio: F) -> Result<Momentum>
where
    F: FnOnce() -> Result<f64>,
{
    let mut out = Momentum {
        mu_tilde: None,
        raw: None,
        beta: 0.0,
        clamped: false,
        next_t: state.nesterov_t,
    };
    match rule {
        MomentumRule::ConstMom(mu) => {
            let mu = mu.clamp(0.0, l);
            out.mu_tilde = Some(mu);
            out.beta = momentum_from_estimate(mu, l);
        }
        MomentumRule::NesterovSmooth => {
            let t = state.nesterov_t;
            let next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            out.beta = (t - 1.0) / next;
            out.next_t = next;
        }
        MomentumRule::AccVariantI | MomentumRule::AccVariantII => {
            let raw = ratio()?;
            let mut est = raw;
            if rule == MomentumRule::AccVariantII {
                if let Some(prev) = state.mu_tilde_prev {
                    est = est.min(prev);
                }
            }
            let lo = MU_TILDE_FLOOR * l;
            let clamped_est = est.clamp(lo, l);
            out.clamped = clamped_est != est;
            out.raw = Some(raw);
            out.mu_tilde = Some(clamped_est);
            out.beta = momentum_from_estimate(clamped_est, l);
        }
    }
    Ok(out)
}

fn extrapolate(state: &IterateState, y_next: Vector, m: &Momentum) -> IterateState {
    let x_next = &y_next + m.beta * (&y_next - state.y());
    IterateState {
        x: x_next,
        y: Some(y_next),
        k: state.k + 1,
        mu_tilde_prev: m.mu_tilde.or(state.mu_tilde_prev),
        nesterov_t: m.next_t,
    }
}

/// One iteration of the accelerated method:
/// `yₖ₊₁ = xₖ − ∇f(xₖ)/L`, `xₖ₊₁ = yₖ₊₁ + βₖ(yₖ₊₁ − yₖ)`.
pub fn agm_step<O: SmoothOracle + ?Sized>(
    oracle: &O,
    state: &IterateState,
    rule: MomentumRule,
) -> Result<AgmStep> {
    crate::linalg::check_dim(&state.x, oracle.dim())?;
    let f_star = if rule.is_adaptive() {
        oracle.f_star().ok_or(Error::MissingFStar)?
    } else {
        f64::NEG_INFINITY
    };
    let l = oracle.class().l();
    let y_next = &state.x - oracle.gradient(&state.x) / l;
    let mut y_eval = None;
    let m = momentum(rule, state, l, || {
        let (fy, gy) = oracle.value_and_gradient(&y_next);
        let gap = fy - f_star;
        let gs = gy.norm_squared();
        if gap_is_zero(gap, f_star) || grad_is_zero(gs, l) {
            return Err(Error::GradientVanished { iteration: state.k });
        }
        y_eval = Some((fy, gy));
        Ok(gs / (2.0 * gap))
    })?;
    let next = extrapolate(state, y_next, &m);
    Ok(AgmStep {
        state: next,
        mu_tilde: m.mu_tilde,
        mu_tilde_raw: m.raw,
        beta: m.beta,
        clamped: m.clamped,
        y_eval,
    })
}

/// Accelerated step with an explicitly supplied momentum `beta`.
pub fn agm_step_with_beta<O: SmoothOracle + ?Sized>(
    oracle: &O,
    state: &IterateState,
    beta: f64,
) -> IterateState {
    let l = oracle.class().l();
    let y_next = &state.x - oracle.gradient(&state.x) / l;
    let x_next = &y_next + beta * (&y_next - state.y());
    IterateState {
        x: x_next,
        y: Some(y_next),
        k: state.k + 1,
        mu_tilde_prev: state.mu_tilde_prev,
        nesterov_t: state.nesterov_t,
    }
}

/// One iteration of the proximal accelerated method:
/// `yₖ₊₁ = prox_{h/L}(xₖ − ∇f(xₖ)/L)`, with adaptive estimates
/// `μ̃ₖ = D(yₖ₊₁, L)/(2(F(yₖ₊₁) − F*))`.
pub fn prox_agm_step<S, R>(
    composite: &CompositeOracle<S, R>,
    state: &IterateState,
    rule: MomentumRule,
) -> Result<AgmStep>
where
    S: SmoothOracle,
    R: Regularizer,
{
    crate::linalg::check_dim(&state.x, composite.dim())?;
    let f_star = if rule.is_adaptive() {
        composite.f_star().ok_or(Error::MissingFStar)?
    } else {
        f64::NEG_INFINITY
    };
    let l = composite.class().l();
    let (y_next, _) = composite.prox_gradient_point(&state.x);
    let m = momentum(rule, state, l, || {
        let gap = composite.value(&y_next) - f_star;
        let d = composite.local_curvature_gap(&y_next);
        if gap_is_zero(gap, f_star) || grad_is_zero(d, l) {
            return Err(Error::GradientVanished { iteration: state.k });
        }
        Ok(d / (2.0 * gap))
    })?;
    let next = extrapolate(state, y_next, &m);
    Ok(AgmStep {
        state: next,
        mu_tilde: m.mu_tilde,
        mu_tilde_raw: m.raw,
        beta: m.beta,
        clamped: m.clamped,
        y_eval: None,
    })
}
