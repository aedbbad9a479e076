use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::LabelColumn;
use crate::error::{Error, Result};
use crate::methods::MethodSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProblemKind {
    /// `½‖Ax − b‖²`. Without a dataset, `A` is a synthetic `rows × dim`
    /// matrix whose Gram spectrum is log-spaced on `[mu, l]`.
    Quadratic,
    /// Quadratic whose Hessian has the eigenvectors of `AᵀA` and its spectrum
    /// mapped affinely onto `[mu, l]`. Without a dataset, `A` has correlated
    /// neighbouring columns.
    Rescaled,
    /// Logistic loss plus `(reg/2)‖x‖²`.
    Logistic { reg: f64 },
    /// `½‖Ax − b‖² + l1‖x‖₁`.
    Lasso { l1: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FStarPolicy {
    Exact,
    Presolve,
    Value(f64),
}

impl FromStr for FStarPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(FStarPolicy::Exact),
            "presolve" => Ok(FStarPolicy::Presolve),
            v => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(FStarPolicy::Value)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "fstar must be exact, presolve or a number, got `{v}`"
                    ))
                }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Libsvm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub format: DataFormat,
    pub label_column: LabelColumn,
    pub header: bool,
    pub standardize: bool,
    pub intercept: bool,
}

/// Experiment settings. See [`ExperimentConfig::parse`] for the file format.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub dataset: Option<DatasetSpec>,
    pub rows: usize,
    pub dim: usize,
    pub mu: f64,
    pub l: f64,
    pub methods: Vec<MethodSpec>,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    pub f_star: FStarPolicy,
    pub presolve_budget: usize,
    pub presolve_tol: f64,
    pub allow_low_confidence: bool,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Quadratic,
            dataset: None,
            rows: 200,
            dim: 50,
            mu: 1e-3,
            l: 1.0,
            methods: vec![
                MethodSpec::Gd,
                MethodSpec::VariantI,
                MethodSpec::Agm,
                MethodSpec::AccII,
            ],
            seed: 0,
            max_iter: 10_000,
            tol: 1e-9,
            f_star: FStarPolicy::Exact,
            presolve_budget: 100_000,
            presolve_tol: 1e-24,
            allow_low_confidence: false,
            out_dir: PathBuf::from("out"),
        }
    }
}

pub const KEYS: &[&str] = &[
    "problem",
    "reg",
    "l1",
    "dataset",
    "format",
    "label_column",
    "header",
    "standardize",
    "intercept",
    "rows",
    "dim",
    "mu",
    "l",
    "methods",
    "seed",
    "max_iter",
    "tol",
    "fstar",
    "presolve_budget",
    "presolve_tol",
    "allow_low_confidence",
    "out_dir",
];

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Config(format!("bad value `{raw}` for `{key}`")))
}

fn flag(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "bad value `{raw}` for `{key}`; expected true or false"
        ))),
    }
}

impl ExperimentConfig {
    /// Parses `key = value` lines. `#` starts a comment; unknown and repeated
    /// keys are errors. Relative paths resolve against `base`.
    ///
    /// | key | default | meaning |
    /// |---|---|---|
    /// | `problem` | `quadratic` | `quadratic`, `rescaled`, `logistic` or `lasso` |
    /// | `reg` | `0` | logistic `ℓ₂` weight |
    /// | `l1` | `1` | lasso `ℓ₁` weight |
    /// | `dataset` | none | CSV or LIBSVM file; synthetic data if absent |
    /// | `format` | by extension | `csv` or `libsvm` |
    /// | `label_column` | `last` | `first`, `last` or a 0-based index |
    /// | `header` | `false` | CSV has a header line |
    /// | `standardize` | `true` | standardize columns |
    /// | `intercept` | `false` | append a column of ones |
    /// | `rows`, `dim` | `200`, `50` | synthetic data size |
    /// | `mu`, `l` | `0.001`, `1` | target spectrum (quadratic problems), `l` also rescales datasets |
    /// | `methods` | `gd, variant1, agm, acc2` | comma-separated method names, may be empty |
    /// | `seed` | `0` | data and `x₀` seed |
    /// | `max_iter` | `10000` | iteration budget |
    /// | `tol` | `1e-9` | gap tolerance for stopping and the summary |
    /// | `fstar` | `exact` | `exact`, `presolve` or a number |
    /// | `presolve_budget`, `presolve_tol` | `100000`, `1e-24` | presolve stopping rule |
    /// | `allow_low_confidence` | `false` | proceed when presolve hits its budget |
    /// | `out_dir` | `out` | output directory |
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let k = k.trim().to_ascii_lowercase();
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::Config(format!("line {}: unknown key `{k}`", i + 1)));
            }
            if entries.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: repeated key `{k}`", i + 1)));
            }
        }
        let get = |k: &str| entries.get(k).map(String::as_str);
        let mut cfg = ExperimentConfig::default();
        let reg = get("reg").map_or(Ok(0.0), |v| value::<f64>("reg", v))?;
        let l1 = get("l1").map_or(Ok(1.0), |v| value::<f64>("l1", v))?;
        cfg.problem = match get("problem").unwrap_or("quadratic") {
            "quadratic" => ProblemKind::Quadratic,
            "rescaled" => ProblemKind::Rescaled,
            "logistic" => ProblemKind::Logistic { reg },
            "lasso" => ProblemKind::Lasso { l1 },
            p => return Err(Error::Config(format!("unknown problem `{p}`"))),
        };
        if let Some(path) = get("dataset") {
            let path = crate::data::resolve(base, Path::new(path));
            let format = match get("format") {
                Some("csv") => DataFormat::Csv,
                Some("libsvm") => DataFormat::Libsvm,
                Some(f) => return Err(Error::Config(format!("unknown format `{f}`"))),
                None => match path.extension().and_then(|e| e.to_str()) {
                    Some("csv") => DataFormat::Csv,
                    _ => DataFormat::Libsvm,
                },
            };
            let label_column = match get("label_column").unwrap_or("last") {
                "last" => LabelColumn::Last,
                "first" => LabelColumn::First,
                i => LabelColumn::Index(value("label_column", i)?),
            };
            cfg.dataset = Some(DatasetSpec {
                path,
                format,
                label_column,
                header: get("header").map_or(Ok(false), |v| flag("header", v))?,
                standardize: get("standardize").map_or(Ok(true), |v| flag("standardize", v))?,
                intercept: get("intercept").map_or(Ok(false), |v| flag("intercept", v))?,
            });
        }
        if let Some(v) = get("rows") {
            cfg.rows = value("rows", v)?;
        }
        if let Some(v) = get("dim") {
            cfg.dim = value("dim", v)?;
        }
        if let Some(v) = get("mu") {
            cfg.mu = value("mu", v)?;
        }
        if let Some(v) = get("l") {
            cfg.l = value("l", v)?;
        }
        if let Some(v) = get("methods") {
            cfg.methods = v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<Result<_>>()?;
        }
        if let Some(v) = get("seed") {
            cfg.seed = value("seed", v)?;
        }
        if let Some(v) = get("max_iter") {
            cfg.max_iter = value("max_iter", v)?;
        }
        if let Some(v) = get("tol") {
            cfg.tol = value("tol", v)?;
        }
        if let Some(v) = get("fstar") {
            cfg.f_star = v.parse()?;
        }
        if let Some(v) = get("presolve_budget") {
            cfg.presolve_budget = value("presolve_budget", v)?;
        }
        if let Some(v) = get("presolve_tol") {
            cfg.presolve_tol = value("presolve_tol", v)?;
        }
        if let Some(v) = get("allow_low_confidence") {
            cfg.allow_low_confidence = flag("allow_low_confidence", v)?;
        }
        if let Some(v) = get("out_dir") {
            cfg.out_dir = crate::data::resolve(base, Path::new(v));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0 && self.l > self.mu && self.l.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 <= mu < l, got mu = {}, l = {}",
                self.mu, self.l
            )));
        }
        if self.dataset.is_none() && (self.rows == 0 || self.dim == 0) {
            return Err(Error::Config("rows and dim must be positive".to_string()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Config(format!("tol {} must be >= 0", self.tol)));
        }
        match self.problem {
            ProblemKind::Logistic { reg } if !(reg >= 0.0 && reg.is_finite()) => {
                Err(Error::Config(format!("reg {reg} must be >= 0")))
            }
            ProblemKind::Logistic { .. } if self.dataset.is_none() => Err(Error::Config(
                "logistic problems need a dataset".to_string(),
            )),
            ProblemKind::Lasso { l1 } if !(l1 > 0.0 && l1.is_finite()) => {
                Err(Error::Config(format!("l1 {l1} must be > 0")))
            }
            ProblemKind::Logistic { .. } | ProblemKind::Lasso { .. }
                if self.f_star == FStarPolicy::Exact =>
            {
                Err(Error::Config(
                    "f* is not known in closed form here; use fstar = presolve or a value"
                        .to_string(),
                ))
            }
            _ => Ok(()),
        }
    }
}
