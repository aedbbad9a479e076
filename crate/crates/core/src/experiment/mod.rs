//! Experiment harness: method suites on configured problems, rate curves and
//! step-size histograms, all written as plot-ready CSV.
//!
//! CSV schemas (header line first, empty field for "not applicable"):
//!
//! * trace: `iter,f_gap,best_gap,grad_sq,step_or_mu,beta`
//! * summary: `method,iterations,iterations_to_tol,final_gap,best_gap,termination,clamp_events,f_star,f_star_confidence`
//! * rate curve: `gamma,rho,rho_analytic`
//! * κ sweep: `kappa,rho_max,rho_max_analytic`
//! * histogram: `bin_center,proportion`
//! * certificates: `tag,mu,l,param,max_residual,multiplier_min,samples,passed`

mod config;
mod problems;

pub use config::{DataFormat, DatasetSpec, ExperimentConfig, FStarPolicy, ProblemKind, KEYS};
pub use problems::{
    build_problem, correlated_features, log_spectrum, rescaled_quadratic, rng,
    standard_normal_vector, synthetic_features, synthetic_least_squares, Problem, Stream,
};

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::Vector;
use crate::methods::{run, run_composite, MethodSpec, RunOptions, RunTrace, StopRule};
use crate::oracles::{Confidence, RegularityClass, ISOTROPIC_MARGIN};
use crate::pep::{self, PepRule};
use crate::rates::{self, RateFormula};

pub const TRACE_HEADER: [&str; 6] = ["iter", "f_gap", "best_gap", "grad_sq", "step_or_mu", "beta"];
pub const SUMMARY_HEADER: [&str; 9] = [
    "method",
    "iterations",
    "iterations_to_tol",
    "final_gap",
    "best_gap",
    "termination",
    "clamp_events",
    "f_star",
    "f_star_confidence",
];
pub const CURVE_HEADER: [&str; 3] = ["gamma", "rho", "rho_analytic"];
pub const SWEEP_HEADER: [&str; 3] = ["kappa", "rho_max", "rho_max_analytic"];
pub const HISTOGRAM_HEADER: [&str; 2] = ["bin_center", "proportion"];

/// Shortest round-trip representation, in exponent form outside `[1e-4, 1e15)`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn field(v: Option<f64>) -> String {
    v.map_or_else(String::new, format_float)
}

/// Starting point shared by every method of an experiment.
pub fn start_point(dim: usize, seed: u64) -> Vector {
    standard_normal_vector(dim, &mut rng(seed, Stream::Start))
}

/// Runs one method on a problem.
pub fn run_method(
    problem: &Problem,
    spec: MethodSpec,
    x0: &Vector,
    opts: &RunOptions,
) -> Result<RunTrace> {
    let method = spec.resolve(problem.class());
    match problem {
        Problem::Quadratic(q) => run(q, &method, x0, opts),
        Problem::Logistic(o) => run(o, &method, x0, opts),
        Problem::Lasso(c) => run_composite(c, &method, x0, opts),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub method: MethodSpec,
    pub iterations: usize,
    pub iterations_to_tol: Option<usize>,
    pub final_gap: f64,
    pub best_gap: f64,
    pub termination: String,
    pub clamp_events: usize,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub summary: Vec<SummaryRow>,
    pub traces: Vec<(MethodSpec, RunTrace)>,
    pub files: Vec<PathBuf>,
    pub f_star: f64,
    pub f_star_confidence: Confidence,
}

fn confidence_name(c: Confidence) -> &'static str {
    match c {
        Confidence::Exact => "exact",
        Confidence::Converged => "converged",
        Confidence::LowConfidence => "low",
    }
}

pub fn trace_path(out_dir: &Path, method: MethodSpec) -> PathBuf {
    out_dir.join(format!("trace_{}.csv", method.name()))
}

pub fn write_trace_csv(trace: &RunTrace, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    for r in &trace.rows {
        w.write_record([
            r.k.to_string(),
            format_float(r.f_gap),
            format_float(r.best_gap),
            format_float(r.grad_sq),
            field(r.step_or_mu),
            field(r.beta),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns of the emitted schemas that hold text.
pub const TEXT_COLUMNS: [&str; 5] = [
    "method",
    "termination",
    "f_star_confidence",
    "tag",
    "passed",
];

/// A CSV table of numbers with optional (empty) fields. `raw` keeps every
/// field as written; text columns read as `None` in `rows`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub raw: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn text_column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.headers.iter().position(|h| h == name)?;
        Some(self.raw.iter().map(|r| r[j].as_str()).collect())
    }
}

/// Reads any CSV written by this module. Non-numeric fields outside
/// [`TEXT_COLUMNS`] are parse errors.
pub fn read_table(path: impl AsRef<Path>) -> Result<Table> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let text: Vec<bool> = headers
        .iter()
        .map(|h| TEXT_COLUMNS.contains(&h.as_str()))
        .collect();
    let mut rows = Vec::new();
    let mut raw = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let mut parsed = Vec::with_capacity(record.len());
        for (j, token) in record.iter().enumerate() {
            parsed.push(match token {
                "" => None,
                _ if text.get(j).copied().unwrap_or(false) => None,
                t => Some(f64::from_str(t).map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    row,
                    column: j + 1,
                    message: format!("cannot parse {t:?} as a number"),
                })?),
            });
        }
        rows.push(parsed);
        raw.push(record.iter().map(str::to_string).collect());
    }
    Ok(Table { headers, rows, raw })
}

/// Runs every configured method from a shared seeded start point, in
/// parallel when `exec` allows, then writes one trace per method and
/// `summary.csv` into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut seen = cfg.methods.clone();
    seen.sort();
    if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Config(format!("method `{}` listed twice", w[0])));
    }
    let problem = build_problem(cfg)?;
    let optimum = problem.optimum().ok_or(Error::MissingFStar)?;
    let x0 = start_point(problem.dim(), cfg.seed);
    let opts = RunOptions {
        stop: StopRule {
            max_iter: cfg.max_iter,
            gap_tol: Some(cfg.tol),
            grad_tol: None,
        },
        ..RunOptions::default()
    };
    let traces = exec
        .map(&cfg.methods, |&m| {
            run_method(&problem, m, &x0, &opts).map(|t| (m, t))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    fs::create_dir_all(&cfg.out_dir)?;
    let mut files = Vec::new();
    let mut summary = Vec::new();
    for (m, trace) in &traces {
        let path = trace_path(&cfg.out_dir, *m);
        write_trace_csv(trace, &path)?;
        files.push(path);
        summary.push(SummaryRow {
            method: *m,
            iterations: trace.iterations(),
            iterations_to_tol: trace.iterations_to(cfg.tol),
            final_gap: trace.final_gap(),
            best_gap: trace.best_gap(),
            termination: trace.termination.to_string(),
            clamp_events: trace.clamp_events,
        });
    }
    let path = cfg.out_dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(SUMMARY_HEADER)?;
    for s in &summary {
        w.write_record([
            s.method.name().to_string(),
            s.iterations.to_string(),
            s.iterations_to_tol
                .map_or_else(String::new, |k| k.to_string()),
            format_float(s.final_gap),
            format_float(s.best_gap),
            s.termination.clone(),
            s.clamp_events.to_string(),
            format_float(optimum.value),
            confidence_name(optimum.confidence).to_string(),
        ])?;
    }
    w.flush()?;
    files.push(path);
    Ok(ExperimentOutput {
        summary,
        traces,
        files,
        f_star: optimum.value,
        f_star_confidence: optimum.confidence,
    })
}

/// Step or momentum rule whose rate curve is plotted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveRule {
    VariantI,
    VariantII,
    RegularPolyak,
    Adaptive,
}

impl CurveRule {
    pub fn name(self) -> &'static str {
        match self {
            CurveRule::VariantI => "variant1",
            CurveRule::VariantII => "variant2",
            CurveRule::RegularPolyak => "polyak",
            CurveRule::Adaptive => "adaptive",
        }
    }

    fn pep_rule(self) -> Option<PepRule> {
        match self {
            CurveRule::VariantI => Some(PepRule::VariantI),
            CurveRule::RegularPolyak => Some(PepRule::RegularPolyak),
            _ => None,
        }
    }

    fn formula(self, class: RegularityClass) -> Option<RateFormula> {
        match self {
            CurveRule::VariantI => Some(RateFormula::VariantI(class)),
            CurveRule::VariantII => Some(RateFormula::VariantII(class)),
            CurveRule::Adaptive => Some(RateFormula::Adaptive(class)),
            CurveRule::RegularPolyak => None,
        }
    }

    /// Interval of the curve's argument (`γ`, or `μ̃` for the adaptive rate).
    pub fn domain(self, class: RegularityClass) -> (f64, f64) {
        match (self.pep_rule(), self.formula(class)) {
            (Some(p), _) => p.admissible_interval(class),
            (None, Some(f)) => {
                let (lo, hi) = f.domain();
                if self == CurveRule::Adaptive {
                    // open at 0
                    (hi * 1e-6, hi)
                } else {
                    (lo, hi)
                }
            }
            (None, None) => unreachable!("every rule has a domain"),
        }
    }

    /// Worst case over the domain in closed form.
    pub fn analytic_max(self, class: RegularityClass) -> f64 {
        match self {
            CurveRule::VariantI | CurveRule::VariantII => rates::variant_worst_case(class),
            CurveRule::RegularPolyak => rates::regular_polyak_worst_case(class),
            CurveRule::Adaptive => 1.0 / (1.0 + self.domain(class).0 / class.l()),
        }
    }
}

impl fmt::Display for CurveRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CurveRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "variant1" => Ok(CurveRule::VariantI),
            "variant2" => Ok(CurveRule::VariantII),
            "polyak" => Ok(CurveRule::RegularPolyak),
            "adaptive" => Ok(CurveRule::Adaptive),
            other => Err(Error::Config(format!("unknown rule `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub gamma: f64,
    /// Performance-estimation value where available, else the closed form.
    pub rho: f64,
    pub rho_analytic: Option<f64>,
}

/// `grid ≥ 2` uniformly spaced points over the rule's domain.
pub fn emit_rate_curves(
    class: RegularityClass,
    rule: CurveRule,
    grid: usize,
    exec: Execution,
) -> Result<Vec<CurvePoint>> {
    if grid < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid size {grid} must be >= 2"
        )));
    }
    if rule.pep_rule().is_some() && class.mu() <= 0.0 {
        return Err(Error::InvalidParameter(
            "rate curves need mu > 0".to_string(),
        ));
    }
    let (lo, hi) = rule.domain(class);
    let at = |i: usize| {
        if i + 1 == grid {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (grid - 1) as f64
        }
    };
    exec.map_range(grid, |i| {
        let gamma = at(i);
        let analytic = rule
            .formula(class)
            .map(|f| rates::rate_value(f, gamma))
            .transpose()?;
        let rho = match rule.pep_rule() {
            Some(p) => pep::solve_rho_of_gamma(class, gamma, p)?.objective,
            None => analytic.expect("closed form exists without a performance estimate"),
        };
        Ok(CurvePoint {
            gamma,
            rho,
            rho_analytic: analytic,
        })
    })
    .into_iter()
    .collect()
}

pub fn write_curve_csv(points: &[CurvePoint], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CURVE_HEADER)?;
    for p in points {
        w.write_record([
            format_float(p.gamma),
            format_float(p.rho),
            field(p.rho_analytic),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub kappa: f64,
    pub rho_max: f64,
    pub rho_max_analytic: f64,
}

/// Worst case over the rule's domain for each `κ = μ/L` with `L = 1`. Rules
/// with a performance estimate use [`pep::sweep_gamma`]; the others maximize
/// the closed form. `κ = 1` is evaluated at `1 − ISOTROPIC_MARGIN`.
pub fn kappa_sweep(
    kappas: &[f64],
    rule: CurveRule,
    grid: usize,
    exec: Execution,
) -> Result<Vec<SweepPoint>> {
    kappas
        .iter()
        .map(|&kappa| {
            let mu = if kappa == 1.0 {
                1.0 - ISOTROPIC_MARGIN
            } else {
                kappa
            };
            let class = RegularityClass::new(mu, 1.0)?;
            let rho_max = match (rule.pep_rule(), rule.formula(class)) {
                (Some(p), _) => pep::sweep_gamma(class, p, grid, exec)?.max,
                (None, Some(f)) => {
                    let (lo, hi) = rule.domain(class);
                    rates::max_rate(
                        |g| rates::rate_value(f, g).unwrap_or(f64::NEG_INFINITY),
                        lo,
                        hi,
                    )
                    .1
                }
                (None, None) => unreachable!("every rule has a domain"),
            };
            Ok(SweepPoint {
                kappa,
                rho_max,
                rho_max_analytic: rule.analytic_max(class),
            })
        })
        .collect()
}

pub fn write_sweep_csv(points: &[SweepPoint], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SWEEP_HEADER)?;
    for p in points {
        w.write_record([
            format_float(p.kappa),
            format_float(p.rho_max),
            format_float(p.rho_max_analytic),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramBin {
    pub bin_center: f64,
    pub proportion: f64,
}

/// Normalized histogram of `steps` over `[lo, hi]` with `bins` equal bins.
/// Values outside the interval are counted in the end bins; non-finite values
/// are dropped. A degenerate interval puts all mass in one bin.
pub fn emit_step_histogram(
    steps: &[f64],
    lo: f64,
    hi: f64,
    bins: usize,
) -> Result<Vec<HistogramBin>> {
    let steps: Vec<f64> = steps.iter().copied().filter(|s| s.is_finite()).collect();
    if steps.is_empty() {
        return Err(Error::EmptyData);
    }
    if bins == 0 || !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidParameter(format!(
            "bad histogram range [{lo}, {hi}] with {bins} bins"
        )));
    }
    if hi == lo {
        return Ok(vec![HistogramBin {
            bin_center: lo,
            proportion: 1.0,
        }]);
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for s in &steps {
        counts[bin_index(*s, lo, hi, bins)] += 1;
    }
    let total = steps.len() as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| HistogramBin {
            bin_center: lo + width * (i as f64 + 0.5),
            proportion: c as f64 / total,
        })
        .collect())
}

/// Bin of `v` in [`emit_step_histogram`].
pub fn bin_index(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let t = ((v - lo) / (hi - lo) * bins as f64).floor();
    if t < 0.0 {
        0
    } else {
        (t as usize).min(bins - 1)
    }
}

/// Histogram of the `step_or_mu` column of a trace file. Without an explicit
/// range the observed range is used.
pub fn histogram_from_trace(
    path: impl AsRef<Path>,
    range: Option<(f64, f64)>,
    bins: usize,
) -> Result<Vec<HistogramBin>> {
    let table = read_table(path)?;
    let steps: Vec<f64> = table
        .column("step_or_mu")
        .ok_or_else(|| Error::Config("trace has no step_or_mu column".to_string()))?
        .into_iter()
        .flatten()
        .collect();
    if steps.is_empty() {
        return Err(Error::EmptyData);
    }
    let (lo, hi) = range.unwrap_or_else(|| {
        steps
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| {
                (a.min(s), b.max(s))
            })
    });
    emit_step_histogram(&steps, lo, hi, bins)
}

pub fn write_histogram_csv(bins: &[HistogramBin], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(HISTOGRAM_HEADER)?;
    for b in bins {
        w.write_record([format_float(b.bin_center), format_float(b.proportion)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.0, 1.0, -2.5, 1e-300, 123456.789, 3e20, 1.0 / 3.0, 5e-5] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(1e-12), "1e-12");
    }

    #[test]
    fn histogram_basics() {
        let h = emit_step_histogram(&[1.0; 7], 1.0, 10.0, 9).unwrap();
        assert_eq!(h[0].proportion, 1.0);
        assert!(h[1..].iter().all(|b| b.proportion == 0.0));
        let h = emit_step_histogram(&[0.5, 1.0, 3.3, 10.0, 12.0], 1.0, 10.0, 3).unwrap();
        let total: f64 = h.iter().map(|b| b.proportion).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(h[0].proportion, 0.6);
        assert!(emit_step_histogram(&[], 0.0, 1.0, 3).is_err());
    }

    #[test]
    fn variant1_curve_level() {
        let class = RegularityClass::new(0.1, 1.0).unwrap();
        let pts = emit_rate_curves(class, CurveRule::VariantI, 101, Execution::Sequential).unwrap();
        for p in &pts {
            assert!((p.rho - p.rho_analytic.unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn curve_rule_names() {
        for r in [
            CurveRule::VariantI,
            CurveRule::VariantII,
            CurveRule::RegularPolyak,
            CurveRule::Adaptive,
        ] {
            assert_eq!(r.name().parse::<CurveRule>().unwrap(), r);
        }
    }
}
