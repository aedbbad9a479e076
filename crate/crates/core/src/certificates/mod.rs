//! Numerical verification of the proof certificates behind the rates.
//!
//! Each certificate is a weighted sum of interpolation inequalities that is
//! claimed to equal, as a polynomial identity in free atoms (points,
//! gradients, function values), a potential difference plus nonnegative
//! residual terms. [`check_identity`] samples atoms and compares both sides;
//! samples whose residual comes close to the tolerance are re-evaluated in
//! exact rational arithmetic.

mod identities;
mod polynomials;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use identities::{layout, Atoms, Params, Scalar};
pub use polynomials::{
    check_polynomials, check_shifted_bracket, p1, p2, p3_closed_lower, p3_closed_upper, p4,
    BracketReport, PolynomialReport,
};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::oracles::RegularityClass;
use crate::rates;

/// Tolerance on required-nonnegative quantities.
pub const SIGN_TOL: f64 = 1e-12;
/// Relative residual tolerance.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdentityTag {
    /// Distance contraction of the gradient method with Variant I steps; free
    /// parameter `γ ∈ (1/L, 1/μ)`.
    VariantIDistance,
    /// Gap contraction with Variant II steps; `γ ∈ [1/L, (2L − μ)/L²]`.
    VariantIIGap,
    /// Potential `(L − μ)/2‖x − y‖² + f(y) − f*` for any momentum `β ∈ [0, 1]`.
    RobustMomentum,
    /// Potential `L/2‖x − y‖² + f(y) − f*` with estimate `μ̃ ∈ (0, L]`; only
    /// convexity is used.
    AdaptiveMomentum,
    /// Shifted potential with rate `ρ₁` for `β` in the shifted bracket.
    ShiftedPotential,
}

impl IdentityTag {
    pub const ALL: [IdentityTag; 5] = [
        IdentityTag::VariantIDistance,
        IdentityTag::VariantIIGap,
        IdentityTag::RobustMomentum,
        IdentityTag::AdaptiveMomentum,
        IdentityTag::ShiftedPotential,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IdentityTag::VariantIDistance => "distance",
            IdentityTag::VariantIIGap => "gap",
            IdentityTag::RobustMomentum => "robust",
            IdentityTag::AdaptiveMomentum => "adaptive",
            IdentityTag::ShiftedPotential => "shifted",
        }
    }

    /// Interval of the free parameter for `class`.
    pub fn domain(&self, class: RegularityClass) -> (f64, f64) {
        let (mu, l) = (class.mu(), class.l());
        match self {
            IdentityTag::VariantIDistance => {
                (1.0 / l, if mu > 0.0 { 1.0 / mu } else { f64::INFINITY })
            }
            IdentityTag::VariantIIGap => (1.0 / l, (2.0 * l - mu) / (l * l)),
            IdentityTag::RobustMomentum => (0.0, 1.0),
            IdentityTag::AdaptiveMomentum => (0.0, l),
            IdentityTag::ShiftedPotential => rates::shifted_bracket(class),
        }
    }
}

impl fmt::Display for IdentityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        IdentityTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown identity `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    pub samples: usize,
    pub dim: usize,
    pub seed: u64,
    pub tol: f64,
    pub exec: Execution,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            samples: 1000,
            dim: 4,
            seed: 0,
            tol: RESIDUAL_TOL,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub tag: IdentityTag,
    pub mu: f64,
    pub l: f64,
    pub param: f64,
    /// Largest `|LHS − RHS|/max(1, |LHS|, |RHS|)` over samples.
    pub max_residual: f64,
    /// Smallest required-nonnegative multiplier or coefficient.
    pub multiplier_min: f64,
    pub samples: usize,
    /// Samples re-evaluated in exact arithmetic.
    pub rechecked: usize,
    pub tol: f64,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tol && self.multiplier_min >= -SIGN_TOL
    }
}

fn domain_error(tag: IdentityTag, value: f64, (lo, hi): (f64, f64)) -> Error {
    Error::Domain {
        what: match tag {
            IdentityTag::VariantIDistance | IdentityTag::VariantIIGap => "step size",
            IdentityTag::RobustMomentum | IdentityTag::ShiftedPotential => "momentum",
            IdentityTag::AdaptiveMomentum => "momentum estimate",
        },
        value,
        lo,
        hi,
    }
}

/// Internal parameters for `param` given in user units (`γ`, `β` or `μ̃`).
pub fn params_for(tag: IdentityTag, class: RegularityClass, param: f64) -> Result<Params<f64>> {
    let (lo, hi) = tag.domain(class);
    let slack = 1e-12 * hi.abs().clamp(1.0, 1e300);
    let inside = match tag {
        IdentityTag::VariantIDistance => param > lo && param < hi,
        IdentityTag::AdaptiveMomentum => param > lo && param <= hi + slack,
        _ => param >= lo - slack && param <= hi + slack,
    };
    if !param.is_finite() || !inside {
        return Err(domain_error(tag, param, (lo, hi)));
    }
    if tag == IdentityTag::ShiftedPotential && class.mu() <= 0.0 {
        return Err(Error::InvalidClass {
            mu: class.mu(),
            l: class.l(),
        });
    }
    let (mu, l) = (class.mu(), class.l());
    let p = match tag {
        IdentityTag::AdaptiveMomentum => (param / l).sqrt(),
        _ => param,
    };
    Ok(Params {
        mu,
        l,
        p,
        rho: rates::rho1(class),
    })
}

/// Multipliers of the certificate at `param`.
pub fn default_multipliers(
    tag: IdentityTag,
    class: RegularityClass,
    param: f64,
) -> Result<Vec<f64>> {
    Ok(identities::multipliers::<f64>(
        tag,
        &params_for(tag, class, param)?,
    ))
}

/// Atoms for sample `index`: vector entries uniform on `[−1, 1]`, `f*` uniform
/// on `[−1, 1]` and other function values `f* + U[0, 1]`. Each sample has its
/// own generator stream, so results do not depend on evaluation order.
pub fn sample_atoms(tag: IdentityTag, dim: usize, seed: u64, index: usize) -> Atoms<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let (nv, ns) = layout(tag);
    let vectors = (0..nv)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    let f_star: f64 = rng.random_range(-1.0..=1.0);
    let mut scalars: Vec<f64> = (0..ns - 1)
        .map(|_| f_star + rng.random_range(0.0..=1.0))
        .collect();
    scalars.push(f_star);
    Atoms { vectors, scalars }
}

fn relative<T: Scalar>(lhs: &T, rhs: &T) -> f64 {
    let diff = (lhs.clone() - rhs.clone()).approx().abs();
    let scale = 1f64.max(lhs.approx().abs()).max(rhs.approx().abs());
    diff / scale
}

/// Relative residual of one sample, rechecked exactly when the double
/// precision value is within a factor 10 of `tol` or above it.
fn sample_residual(
    tag: IdentityTag,
    params: &Params<f64>,
    lam: Option<&[f64]>,
    atoms: &Atoms<f64>,
    tol: f64,
) -> (f64, bool) {
    let lam_f: Vec<f64> = match lam {
        Some(l) => l.to_vec(),
        None => identities::multipliers(tag, params),
    };
    let (lhs, rhs) = identities::sides(tag, params, &lam_f, atoms);
    let r = relative(&lhs, &rhs);
    if !(r >= 0.1 * tol) && r.is_finite() {
        return (r, false);
    }
    let pq: Params<BigRational> = params.to();
    let lam_q: Vec<BigRational> = match lam {
        Some(l) => l.iter().map(|&v| BigRational::of(v)).collect(),
        None => identities::multipliers(tag, &pq),
    };
    let (lq, rq) = identities::sides(tag, &pq, &lam_q, &atoms.to());
    (relative(&lq, &rq), true)
}

fn run_check(
    tag: IdentityTag,
    class: RegularityClass,
    param: f64,
    lam: Option<&[f64]>,
    opts: &CheckOptions,
) -> Result<CertificateReport> {
    let params = params_for(tag, class, param)?;
    if let Some(l) = lam {
        let expected = identities::multipliers::<f64>(tag, &params).len();
        if l.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: l.len(),
            });
        }
    }
    let results = opts.exec.map_range(opts.samples, |i| {
        let atoms = sample_atoms(tag, opts.dim.max(1), opts.seed, i);
        sample_residual(tag, &params, lam, &atoms, opts.tol)
    });
    let max_residual = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let rechecked = results.iter().filter(|r| r.1).count();
    let signs = match lam {
        Some(l) => {
            let mut s = identities::sign_conditions(tag, &params);
            let n = s.len().min(l.len());
            for (i, v) in l.iter().enumerate().take(n) {
                s[i] = s[i].min(*v);
            }
            s
        }
        None => identities::sign_conditions(tag, &params),
    };
    let multiplier_min = signs.into_iter().fold(f64::INFINITY, f64::min);
    Ok(CertificateReport {
        tag,
        mu: class.mu(),
        l: class.l(),
        param,
        max_residual,
        multiplier_min,
        samples: opts.samples,
        rechecked,
        tol: opts.tol,
    })
}

/// Samples `opts.samples` atom sets and checks the identity `tag` at the free
/// parameter `param` (`γ`, `β` or `μ̃`).
pub fn check_identity(
    tag: IdentityTag,
    class: RegularityClass,
    param: f64,
    opts: &CheckOptions,
) -> Result<CertificateReport> {
    run_check(tag, class, param, None, opts)
}

/// As [`check_identity`] with caller-supplied multipliers, e.g. perturbed
/// ones to confirm the check is not vacuous.
pub fn check_identity_with(
    tag: IdentityTag,
    class: RegularityClass,
    param: f64,
    multipliers: &[f64],
    opts: &CheckOptions,
) -> Result<CertificateReport> {
    run_check(tag, class, param, Some(multipliers), opts)
}

/// Minimum of all required-nonnegative quantities over `n_class × n_param`
/// points: `μ/L` log-spaced on `[1e-6, 0.9]`, the free parameter uniform on its
/// domain (open ends nudged inward).
pub fn sign_condition_sweep(
    tag: IdentityTag,
    n_class: usize,
    n_param: usize,
    exec: Execution,
) -> f64 {
    let mins = exec.map_range(n_class, |i| {
        let t = if n_class > 1 {
            i as f64 / (n_class - 1) as f64
        } else {
            0.0
        };
        let kappa = 10f64.powf(-6.0 + t * (0.9f64.log10() + 6.0));
        let class = RegularityClass::new(kappa, 1.0).expect("valid class");
        let (lo, hi) = tag.domain(class);
        let mut best = f64::INFINITY;
        for j in 0..n_param {
            let u = (j as f64 + 0.5) / n_param as f64;
            let param = lo + u * (hi - lo);
            if let Ok(p) = params_for(tag, class, param) {
                for v in identities::sign_conditions(tag, &p) {
                    best = best.min(v);
                }
            }
        }
        best
    });
    mins.into_iter().fold(f64::INFINITY, f64::min)
}

/// Twenty `(class, parameter)` settings spread over the identity's domain.
pub fn default_settings(tag: IdentityTag) -> Vec<(RegularityClass, f64)> {
    let classes = [(0.1, 1.0), (0.02, 2.0), (0.0005, 0.5), (3.0, 10.0)];
    let fractions: [f64; 5] = match tag {
        IdentityTag::VariantIDistance | IdentityTag::AdaptiveMomentum => {
            [0.05, 0.275, 0.5, 0.725, 1.0]
        }
        _ => [0.0, 0.25, 0.5, 0.75, 1.0],
    };
    let mut out = Vec::with_capacity(20);
    for (mu, l) in classes {
        let class = RegularityClass::new(mu, l).expect("valid class");
        let (lo, hi) = tag.domain(class);
        for f in fractions {
            let f = if tag == IdentityTag::VariantIDistance {
                f.min(0.95)
            } else {
                f
            };
            out.push((class, lo + f * (hi - lo)));
        }
    }
    out
}

/// Runs every tag over its [`default_settings`].
pub fn check_all(tags: &[IdentityTag], opts: &CheckOptions) -> Result<Vec<CertificateReport>> {
    let mut out = Vec::new();
    for &tag in tags {
        for (class, param) in default_settings(tag) {
            out.push(check_identity(tag, class, param, opts)?);
        }
    }
    Ok(out)
}

/// Machine-readable report: `tag,mu,l,param,max_residual,multiplier_min,samples,passed`.
pub fn write_csv<W: Write>(reports: &[CertificateReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "tag",
        "mu",
        "l",
        "param",
        "max_residual",
        "multiplier_min",
        "samples",
        "passed",
    ])?;
    for r in reports {
        w.write_record([
            r.tag.name().to_string(),
            r.mu.to_string(),
            r.l.to_string(),
            r.param.to_string(),
            format!("{:e}", r.max_residual),
            format!("{:e}", r.multiplier_min),
            r.samples.to_string(),
            r.passed().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable summary, one line per report.
pub fn render_text(reports: &[CertificateReport]) -> String {
    let mut s = String::new();
    for r in reports {
        s.push_str(&format!(
            "{:<9} mu={:<8} L={:<5} param={:<12.6} residual={:.2e} min_sign={:.3e} samples={} [{}]\n",
            r.tag.name(),
            r.mu,
            r.l,
            r.param,
            r.max_residual,
            r.multiplier_min,
            r.samples,
            if r.passed() { "pass" } else { "FAIL" }
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(mu: f64, l: f64) -> RegularityClass {
        RegularityClass::new(mu, l).unwrap()
    }

    fn quick() -> CheckOptions {
        CheckOptions {
            samples: 100,
            ..CheckOptions::default()
        }
    }

    #[test]
    fn distance_identity_at_worst_case_step() {
        let c = class(0.1, 1.0);
        let r = check_identity(IdentityTag::VariantIDistance, c, 2.0 / 1.1, &quick()).unwrap();
        assert!(r.passed(), "{r:?}");
        let lam = default_multipliers(IdentityTag::VariantIDistance, c, 2.0 / 1.1).unwrap();
        assert!(lam[2].abs() < 1e-15);
    }

    #[test]
    fn distance_identity_at_interior_step() {
        let r = check_identity(
            IdentityTag::VariantIDistance,
            class(0.1, 1.0),
            1.2,
            &quick(),
        )
        .unwrap();
        assert!(r.max_residual < 1e-10);
    }

    #[test]
    fn robust_identity_without_momentum() {
        let r =
            check_identity(IdentityTag::RobustMomentum, class(0.1, 1.0), 0.0, &quick()).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn adaptive_identity_at_full_estimate() {
        let c = class(0.0, 1.0);
        let lam = default_multipliers(IdentityTag::AdaptiveMomentum, c, 1.0).unwrap();
        assert!((lam[0] - 0.5).abs() < 1e-15);
        let r = check_identity(IdentityTag::AdaptiveMomentum, c, 1.0, &quick()).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn domains_are_enforced() {
        let c = class(0.1, 1.0);
        assert!(check_identity(IdentityTag::VariantIDistance, c, 1.0, &quick()).is_err());
        assert!(check_identity(IdentityTag::VariantIIGap, c, 1.95, &quick()).is_err());
        assert!(check_identity(IdentityTag::RobustMomentum, c, 1.1, &quick()).is_err());
        assert!(check_identity(IdentityTag::AdaptiveMomentum, c, 0.0, &quick()).is_err());
        assert!(check_identity(
            IdentityTag::ShiftedPotential,
            class(0.0, 1.0),
            0.9,
            &quick()
        )
        .is_err());
    }

    #[test]
    fn exact_recheck_removes_rounding() {
        let c = class(0.1, 1.0);
        let opts = CheckOptions {
            samples: 5,
            tol: 1e-30,
            ..CheckOptions::default()
        };
        let r = check_identity(IdentityTag::ShiftedPotential, c, 0.4, &opts).unwrap();
        assert!(r.rechecked >= 1 && r.rechecked <= 5);
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn sampling_is_order_independent() {
        let a = sample_atoms(IdentityTag::VariantIIGap, 3, 7, 11);
        let b = sample_atoms(IdentityTag::VariantIIGap, 3, 7, 11);
        assert_eq!(a.vectors, b.vectors);
        let fs = *a.scalars.last().unwrap();
        assert!(a.scalars.iter().all(|&f| f >= fs));
    }

    #[test]
    fn tag_names_round_trip() {
        for t in IdentityTag::ALL {
            assert_eq!(t.name().parse::<IdentityTag>().unwrap(), t);
        }
    }

    #[test]
    fn sides_scale_quadratically() {
        for tag in IdentityTag::ALL {
            let (c, p) = default_settings(tag)[1];
            let params = params_for(tag, c, p).unwrap();
            let lam = identities::multipliers::<f64>(tag, &params);
            for i in 0..20 {
                let a = sample_atoms(tag, 3, 7, i);
                let t = 3.5;
                let scaled = Atoms {
                    vectors: a
                        .vectors
                        .iter()
                        .map(|v| v.iter().map(|x| t * x).collect())
                        .collect(),
                    scalars: a.scalars.iter().map(|x| t * t * x).collect(),
                };
                let (l1, r1) = identities::sides(tag, &params, &lam, &a);
                let (lt, rt) = identities::sides(tag, &params, &lam, &scaled);
                assert!(relative(&(lt / (t * t)), &l1) < 1e-12, "{tag:?}");
                assert!(relative(&(rt / (t * t)), &r1) < 1e-12, "{tag:?}");
            }
        }
    }
}
