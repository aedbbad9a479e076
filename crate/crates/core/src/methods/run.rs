use super::trace::Recorder;
use super::{
    agm_step, prox_agm_step, step_size, AgmStep, IterateState, Method, MomentumRule, RunTrace,
    StepRule, Termination, TraceRow,
};
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::oracles::{CompositeOracle, RegularityClass, Regularizer, SmoothOracle};
use crate::rates::{potential_from_gap, Potential};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StopRule {
    pub max_iter: usize,
    /// Stop once `f − f* ≤ gap_tol`.
    pub gap_tol: Option<f64>,
    /// Stop once `‖∇f‖² ≤ grad_tol`.
    pub grad_tol: Option<f64>,
}

impl StopRule {
    pub fn budget(max_iter: usize) -> Self {
        Self {
            max_iter,
            gap_tol: None,
            grad_tol: None,
        }
    }

    fn met(&self, gap: f64, grad_sq: f64) -> bool {
        self.gap_tol.is_some_and(|t| gap <= t) || self.grad_tol.is_some_and(|t| grad_sq <= t)
    }
}

impl Default for StopRule {
    fn default() -> Self {
        Self::budget(1000)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub stop: StopRule,
    pub record_iterates: bool,
    /// Potential evaluated on every row of an accelerated run.
    pub potential: Option<Potential>,
}

impl RunOptions {
    pub fn budget(max_iter: usize) -> Self {
        Self {
            stop: StopRule::budget(max_iter),
            ..Self::default()
        }
    }

    pub fn until_gap(max_iter: usize, gap_tol: f64) -> Self {
        Self {
            stop: StopRule {
                max_iter,
                gap_tol: Some(gap_tol),
                grad_tol: None,
            },
            ..Self::default()
        }
    }
}

fn row(k: usize, gap: f64, grad_sq: f64, potential: Option<f64>) -> TraceRow {
    TraceRow {
        k,
        f_gap: gap,
        grad_sq,
        step_or_mu: None,
        mu_tilde_raw: None,
        beta: None,
        potential,
        best_gap: gap,
    }
}

// Decides whether the run ends at the row just pushed.
fn verdict(opts: &RunOptions, k: usize, gap: f64, grad_sq: f64) -> Option<Termination> {
    if !(gap.is_finite() && grad_sq.is_finite()) {
        Some(Termination::NonFinite)
    } else if opts.stop.met(gap, grad_sq) {
        Some(Termination::Converged)
    } else if k >= opts.stop.max_iter {
        Some(Termination::Budget)
    } else {
        None
    }
}

fn required_f_star(f_star: Option<f64>) -> Result<f64> {
    match f_star {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(Error::MissingFStar),
    }
}

fn annotate(rec: &mut Recorder, step: &AgmStep) {
    if step.clamped {
        rec.clamp();
    }
    if let Some(last) = rec.last_mut() {
        last.step_or_mu = step.mu_tilde;
        last.mu_tilde_raw = step.mu_tilde_raw;
        last.beta = Some(step.beta);
    }
}

/// Runs `method` on `oracle` from `x0`. The oracle must carry `f*`, since every
/// row reports `f − f*`.
pub fn run<O: SmoothOracle + ?Sized>(
    oracle: &O,
    method: &Method,
    x0: &Vector,
    opts: &RunOptions,
) -> Result<RunTrace> {
    linalg::check_dim(x0, oracle.dim())?;
    let f_star = required_f_star(oracle.f_star())?;
    match *method {
        Method::Gradient(rule) => run_gradient(oracle, rule, x0, opts, f_star),
        Method::Accelerated(rule) => run_accelerated(oracle, rule, x0, opts, f_star),
    }
}

fn run_gradient<O: SmoothOracle + ?Sized>(
    oracle: &O,
    rule: StepRule,
    x0: &Vector,
    opts: &RunOptions,
    f_star: f64,
) -> Result<RunTrace> {
    let class = oracle.class();
    let mut rec = Recorder::new(opts.record_iterates);
    let mut x = x0.clone();
    for k in 0.. {
        let (f, g) = oracle.value_and_gradient(&x);
        let (gap, gs) = (f - f_star, g.norm_squared());
        rec.push(row(k, gap, gs, None), &x, None);
        if let Some(t) = verdict(opts, k, gap, gs) {
            return Ok(rec.finish(t));
        }
        let gamma = match step_size(rule, class, gap, gs, f_star, k) {
            Ok(g) => g,
            Err(Error::GradientVanished { .. }) => return Ok(rec.finish(Termination::Optimal)),
            Err(e) => return Err(e),
        };
        if let Some(last) = rec.last_mut() {
            last.step_or_mu = Some(gamma);
        }
        x -= gamma * g;
    }
    unreachable!()
}

fn potential_at(
    opts: &RunOptions,
    class: RegularityClass,
    x_star: Option<&Vector>,
    x: &Vector,
    y: &Vector,
    gap: f64,
) -> Option<f64> {
    opts.potential
        .and_then(|p| potential_from_gap(p, class, x, y, gap, x_star))
}

fn run_accelerated<O: SmoothOracle + ?Sized>(
    oracle: &O,
    rule: MomentumRule,
    x0: &Vector,
    opts: &RunOptions,
    f_star: f64,
) -> Result<RunTrace> {
    let class = oracle.class();
    let mut rec = Recorder::new(opts.record_iterates);
    let mut state = IterateState::accelerated(x0.clone());
    let mut cache: Option<(f64, Vector)> = None;
    loop {
        let k = state.k;
        let (fy, gy) = cache
            .take()
            .unwrap_or_else(|| oracle.value_and_gradient(state.y()));
        let (gap, gs) = (fy - f_star, gy.norm_squared());
        let pot = potential_at(opts, class, oracle.x_star(), &state.x, state.y(), gap);
        rec.push(row(k, gap, gs, pot), &state.x, state.y.as_ref());
        if let Some(t) = verdict(opts, k, gap, gs) {
            return Ok(rec.finish(t));
        }
        match agm_step(oracle, &state, rule) {
            Ok(step) => {
                annotate(&mut rec, &step);
                cache = step.y_eval;
                state = step.state;
            }
            Err(Error::GradientVanished { .. }) => {
                // the next y is optimal to machine precision; record it and stop
                let y = &state.x - oracle.gradient(&state.x) / class.l();
                let (f, g) = oracle.value_and_gradient(&y);
                rec.push(row(k + 1, f - f_star, g.norm_squared(), None), &y, Some(&y));
                return Ok(rec.finish(Termination::Optimal));
            }
            Err(e) => return Err(e),
        }
    }
}

/// Runs a proximal method on `F = f + h`. Supported: any accelerated rule and
/// fixed-step proximal gradient. Rows report `F − F*` and `D(y, L)` in place of
/// `‖∇f‖²`.
pub fn run_composite<S, R>(
    composite: &CompositeOracle<S, R>,
    method: &Method,
    x0: &Vector,
    opts: &RunOptions,
) -> Result<RunTrace>
where
    S: SmoothOracle,
    R: Regularizer,
{
    linalg::check_dim(x0, composite.dim())?;
    let f_star = required_f_star(composite.f_star())?;
    let class = composite.class();
    let mut rec = Recorder::new(opts.record_iterates);
    match *method {
        Method::Gradient(StepRule::Fixed(gamma)) => {
            let mut x = x0.clone();
            for k in 0.. {
                let gap = composite.value(&x) - f_star;
                let d = composite.local_curvature_gap(&x);
                rec.push(row(k, gap, d, None), &x, None);
                if let Some(t) = verdict(opts, k, gap, d) {
                    return Ok(rec.finish(t));
                }
                if let Some(last) = rec.last_mut() {
                    last.step_or_mu = Some(gamma);
                }
                let g = composite.smooth.gradient(&x);
                x = composite.prox(&(&x - gamma * g), gamma);
            }
            unreachable!()
        }
        Method::Gradient(rule) => Err(Error::UnsupportedMethod(format!(
            "{rule:?} is not available for composite objectives"
        ))),
        Method::Accelerated(rule) => {
            let mut state = IterateState::accelerated(x0.clone());
            loop {
                let k = state.k;
                let gap = composite.value(state.y()) - f_star;
                let d = composite.local_curvature_gap(state.y());
                let pot = potential_at(opts, class, composite.x_star(), &state.x, state.y(), gap);
                rec.push(row(k, gap, d, pot), &state.x, state.y.as_ref());
                if let Some(t) = verdict(opts, k, gap, d) {
                    return Ok(rec.finish(t));
                }
                match prox_agm_step(composite, &state, rule) {
                    Ok(step) => {
                        annotate(&mut rec, &step);
                        state = step.state;
                    }
                    Err(Error::GradientVanished { .. }) => {
                        let (y, _) = composite.prox_gradient_point(&state.x);
                        let gap = composite.value(&y) - f_star;
                        rec.push(
                            row(k + 1, gap, composite.local_curvature_gap(&y), None),
                            &y,
                            Some(&y),
                        );
                        return Ok(rec.finish(Termination::Optimal));
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::oracles::{make_lasso, make_logistic, OptimalValue, Quadratic};

    fn quad() -> Quadratic {
        Quadratic::diagonal(&[0.01, 0.1, 1.0], Vector::zeros(3)).unwrap()
    }

    #[test]
    fn zero_budget_gives_initial_row() {
        let x0 = Vector::from_vec(vec![1.0, 1.0, 1.0]);
        for m in [
            Method::Gradient(StepRule::VariantI),
            Method::Accelerated(MomentumRule::AccVariantII),
        ] {
            let t = run(&quad(), &m, &x0, &RunOptions::budget(0)).unwrap();
            assert_eq!(t.rows.len(), 1);
            assert_eq!(t.termination, Termination::Budget);
            assert!((t.rows[0].f_gap - 0.555).abs() < 1e-15);
            assert!(t.rows[0].step_or_mu.is_none());
        }
    }

    #[test]
    fn rows_have_steps_except_last() {
        let x0 = Vector::from_vec(vec![1.0, 1.0, 1.0]);
        let t = run(
            &quad(),
            &Method::Gradient(StepRule::RegularPolyak),
            &x0,
            &RunOptions::budget(5),
        )
        .unwrap();
        assert_eq!(t.rows.len(), 6);
        assert!(t.rows[..5].iter().all(|r| r.step_or_mu.is_some()));
        assert!(t.rows[5].step_or_mu.is_none());
    }

    #[test]
    fn start_at_optimum_terminates() {
        let t = run(
            &quad(),
            &Method::Gradient(StepRule::VariantI),
            &Vector::zeros(3),
            &RunOptions::budget(10),
        )
        .unwrap();
        assert_eq!(t.termination, Termination::Optimal);
        assert_eq!(t.rows.len(), 1);
    }

    #[test]
    fn missing_f_star_rejected() {
        let f = make_logistic(
            Matrix::identity(2, 2),
            Vector::from_vec(vec![1.0, -1.0]),
            0.1,
        )
        .unwrap();
        let m = Method::Gradient(StepRule::Fixed(1.0));
        assert!(matches!(
            run(&f, &m, &Vector::zeros(2), &RunOptions::budget(3)),
            Err(Error::MissingFStar)
        ));
        let f = f.with_optimum(OptimalValue::exact(0.5));
        assert!(run(&f, &m, &Vector::zeros(2), &RunOptions::budget(3)).is_ok());
    }

    #[test]
    fn gap_tolerance_stops() {
        let x0 = Vector::from_vec(vec![1.0, 1.0, 1.0]);
        let t = run(
            &quad(),
            &Method::Accelerated(MomentumRule::AccVariantI),
            &x0,
            &RunOptions::until_gap(10_000, 1e-10),
        )
        .unwrap();
        assert_eq!(t.termination, Termination::Converged);
        assert!(t.final_gap() <= 1e-10);
        assert_eq!(t.iterations_to(1e-10), Some(t.iterations()));
    }

    #[test]
    fn composite_rejects_polyak_steps() {
        let lasso = make_lasso(
            Matrix::identity(2, 2),
            Vector::from_vec(vec![3.0, 0.2]),
            1.0,
        )
        .unwrap()
        .with_optimum(OptimalValue::exact(2.52));
        let m = Method::Gradient(StepRule::VariantI);
        assert!(matches!(
            run_composite(&lasso, &m, &Vector::zeros(2), &RunOptions::budget(3)),
            Err(Error::UnsupportedMethod(_))
        ));
        let t = run_composite(
            &lasso,
            &Method::Gradient(StepRule::Fixed(1.0)),
            &Vector::zeros(2),
            &RunOptions::budget(3),
        )
        .unwrap();
        assert!(t.final_gap().abs() < 1e-14);
    }

    #[test]
    fn recorded_iterates_match_rows() {
        let x0 = Vector::from_vec(vec![1.0, -1.0, 2.0]);
        let opts = RunOptions {
            record_iterates: true,
            ..RunOptions::budget(4)
        };
        let t = run(
            &quad(),
            &Method::Accelerated(MomentumRule::ConstMom(0.01)),
            &x0,
            &opts,
        )
        .unwrap();
        assert_eq!(t.iterates.len(), t.rows.len());
        assert_eq!(t.iterates[0].y.as_ref(), Some(&x0));
    }
}
