//! Dense datasets loaded from CSV or LIBSVM text files.
//!
//! Rows are samples. Row numbers in parse errors are 1-based line numbers of
//! the file (a header line counts), columns are 1-based field positions.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vector,
    pub name: String,
    pub standardized: bool,
    /// Number of distinct label values in the source file.
    pub label_classes: usize,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vector, name: impl Into<String>) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::EmptyData);
        }
        linalg::check_dim(&labels, features.nrows())?;
        if let Some(bad) = features
            .iter()
            .chain(labels.iter())
            .find(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter(format!("non-finite entry {bad}")));
        }
        let label_classes = distinct(labels.as_slice()).len();
        Ok(Self {
            features,
            labels,
            name: name.into(),
            standardized: false,
            label_classes,
        })
    }

    pub fn rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn cols(&self) -> usize {
        self.features.ncols()
    }

    /// Appends a constant column of ones.
    pub fn with_intercept(mut self) -> Self {
        let n = self.cols();
        self.features = self.features.insert_column(n, 1.0);
        self
    }
}

fn distinct(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(
        || "dataset".to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn parse_error(path: &Path, row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message: message.into(),
    }
}

fn parse_finite(path: &Path, row: usize, column: usize, token: &str) -> Result<f64> {
    match token.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(parse_error(
            path,
            row,
            column,
            format!("non-finite value {token:?}"),
        )),
        Err(_) => Err(parse_error(
            path,
            row,
            column,
            format!("cannot parse {token:?} as a number"),
        )),
    }
}

/// Maps two distinct labels to `−1 < +1` by sorted order. A single class
/// keeps `−1` and maps anything else to `+1`.
pub fn coerce_binary(labels: &[f64], path: &Path) -> Result<Vec<f64>> {
    let classes = distinct(labels);
    match classes.as_slice() {
        [] => Ok(Vec::new()),
        [only] => {
            let v = if *only == -1.0 { -1.0 } else { 1.0 };
            Ok(vec![v; labels.len()])
        }
        [lo, _] => Ok(labels
            .iter()
            .map(|y| if y == lo { -1.0 } else { 1.0 })
            .collect()),
        _ => Err(Error::TooManyClasses {
            path: path.to_path_buf(),
            found: classes.len(),
        }),
    }
}

/// Text labels (`R`/`M` in Sonar) become `−1, +1` by sorted order.
fn text_labels(labels: &[(String, usize)], path: &Path) -> Result<(Vec<f64>, usize)> {
    let mut classes: Vec<&str> = labels.iter().map(|(t, _)| t.as_str()).collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() > 2 {
        return Err(Error::TooManyClasses {
            path: path.to_path_buf(),
            found: classes.len(),
        });
    }
    let v = labels
        .iter()
        .map(|(t, _)| {
            if classes.len() == 2 && t == classes[0] {
                -1.0
            } else {
                1.0
            }
        })
        .collect();
    Ok((v, classes.len()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelColumn {
    First,
    Last,
    /// 0-based column index.
    Index(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    pub has_header: bool,
    /// Map labels to `±1`.
    pub binary: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            label_column: LabelColumn::Last,
            has_header: false,
            binary: true,
        }
    }
}

/// Loads a comma-separated file with binary label coercion.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: LabelColumn,
    has_header: bool,
) -> Result<Dataset> {
    load_csv_with(
        path,
        &CsvOptions {
            label_column,
            has_header,
            binary: true,
        },
    )
}

pub fn load_csv_with(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)?;
    let mut width = None;
    let mut label_at = 0;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut skip_header = opts.has_header;
    for record in reader.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if skip_header {
            skip_header = false;
            continue;
        }
        if record.iter().all(str::is_empty) {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_error(
                path,
                row,
                record.len().min(w) + 1,
                format!("expected {w} fields, found {}", record.len()),
            ));
        }
        if labels.is_empty() {
            label_at = match opts.label_column {
                LabelColumn::First => 0,
                LabelColumn::Last => w - 1,
                LabelColumn::Index(i) if i < w => i,
                LabelColumn::Index(i) => {
                    return Err(parse_error(
                        path,
                        row,
                        i + 1,
                        format!("label column beyond {w} fields"),
                    ))
                }
            };
        }
        for (j, token) in record.iter().enumerate() {
            if j == label_at {
                labels.push((token.to_string(), row));
            } else {
                features.push(parse_finite(path, row, j + 1, token)?);
            }
        }
    }
    let Some(w) = width else {
        return Err(Error::EmptyData);
    };
    let numeric: Result<Vec<f64>> = labels
        .iter()
        .map(|(t, row)| parse_finite(path, *row, label_at + 1, t))
        .collect();
    let (mut labels, label_classes) = match numeric {
        Ok(v) => {
            let k = distinct(&v).len();
            (v, k)
        }
        Err(e) if !opts.binary => return Err(e),
        Err(_) => text_labels(&labels, path)?,
    };
    if opts.binary {
        labels = coerce_binary(&labels, path)?;
    }
    let m = labels.len();
    let mut data = Dataset::new(
        Matrix::from_row_slice(m, w - 1, &features),
        Vector::from_vec(labels),
        stem(path),
    )?;
    data.label_classes = label_classes;
    Ok(data)
}

/// Loads a LIBSVM file (`label idx:value ...`, 1-based increasing indices).
/// The largest index defines the number of columns. Labels are kept as read.
pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let row = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = tokens.next().expect("nonempty line has a token");
        labels.push(parse_finite(path, row, 1, &label.replace('\u{2212}', "-"))?);
        let mut entries = Vec::new();
        let mut last = 0;
        for (j, token) in tokens.enumerate() {
            let column = j + 2;
            let (idx, val) = token.split_once(':').ok_or_else(|| {
                parse_error(
                    path,
                    row,
                    column,
                    format!("expected index:value, found {token:?}"),
                )
            })?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_error(path, row, column, format!("bad index {idx:?}")))?;
            if idx == 0 {
                return Err(parse_error(path, row, column, "indices are 1-based"));
            }
            if idx <= last {
                return Err(parse_error(
                    path,
                    row,
                    column,
                    format!("index {idx} does not increase"),
                ));
            }
            last = idx;
            entries.push((idx - 1, parse_finite(path, row, column, val)?));
        }
        n = n.max(last);
        rows.push(entries);
    }
    if rows.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut features = Matrix::zeros(rows.len(), n);
    for (i, entries) in rows.iter().enumerate() {
        for &(j, v) in entries {
            features[(i, j)] = v;
        }
    }
    Dataset::new(features, Vector::from_vec(labels), stem(path))
}

/// Writes nonzero entries in LIBSVM format. The last column is always written
/// on the first row so that the column count survives a round trip.
pub fn write_libsvm(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let n = data.cols();
    for (i, row) in data.features.row_iter().enumerate() {
        write!(out, "{}", data.labels[i])?;
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 || (i == 0 && j + 1 == n) {
                write!(out, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the features followed by the label column, without a header.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (i, row) in data.features.row_iter().enumerate() {
        let mut fields: Vec<String> = row.iter().map(f64::to_string).collect();
        fields.push(data.labels[i].to_string());
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// Centres every column and scales it to unit population variance; constant
/// columns become zero. With `target_l`, the features are then rescaled so
/// that `λ_max(AᵀA) = target_l`, the smoothness constant of `½‖Ax − b‖²`.
pub fn standardize(data: &Dataset, target_l: Option<f64>) -> Result<Dataset> {
    let m = data.rows();
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "standardizing needs >= 2 rows, got {m}"
        )));
    }
    let mut features = data.features.clone();
    for mut col in features.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
        let sd = (col.norm_squared() / m as f64).sqrt();
        if sd > f64::EPSILON * (1.0 + mean.abs()) {
            col /= sd;
        } else {
            col.fill(0.0);
        }
    }
    if let Some(target) = target_l {
        if !(target > 0.0 && target.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "target L {target} must be > 0"
            )));
        }
        let l = linalg::operator_norm_sq(&features);
        if l > 0.0 {
            features *= (target / l).sqrt();
        }
    }
    Ok(Dataset {
        features,
        labels: data.labels.clone(),
        name: data.name.clone(),
        standardized: true,
        label_classes: data.label_classes,
    })
}

/// Resolves `path` against `base` unless it is absolute.
pub fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}
