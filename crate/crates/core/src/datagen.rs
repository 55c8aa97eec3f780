//! Datasets: synthetic generators, CSV input/output and segmentation of a
//! scalar field sampled on the unit square.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Error, Result};
use crate::features::{BasisSpec, DesignMatrix};
use crate::linalg::DenseMatrix;

/// Slope and intercept of the generating line `y = 1.2 − 0.5x`.
pub const LINE_INTERCEPT: f64 = 1.2;
pub const LINE_SLOPE: f64 = -0.5;
/// Default amplitude of the vertical scatter added around the line.
pub const DEFAULT_JITTER: f64 = 1.0;
/// Default segmentation level for field data.
pub const DEFAULT_FIELD_THRESHOLD: f64 = 4.0;

/// Raw feature rows with binary targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DenseMatrix,
    pub targets: Vec<u8>,
    pub column_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: DenseMatrix, targets: Vec<u8>, column_names: Vec<String>) -> Result<Self> {
        if targets.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                expected: features.rows(),
                found: targets.len(),
            });
        }
        if column_names.len() != features.cols() {
            return Err(Error::DimensionMismatch {
                expected: features.cols(),
                found: column_names.len(),
            });
        }
        if let Some((row, &v)) = targets.iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(Error::InvalidLabel {
                row,
                value: f64::from(v),
            });
        }
        Ok(Dataset {
            features,
            targets,
            column_names,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn raw_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn targets_f64(&self) -> Vec<f64> {
        self.targets.iter().map(|&t| f64::from(t)).collect()
    }

    /// `(class 0 count, class 1 count)`
    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.targets.iter().filter(|&&t| t == 1).count();
        (self.len() - ones, ones)
    }

    pub fn design(&self, basis: BasisSpec) -> Result<DesignMatrix> {
        DesignMatrix::build(basis, &self.features)
    }

    /// Keeps only the named columns, in the given order.
    pub fn select_columns(&self, names: &[&str]) -> Result<Dataset> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.column_names
                    .iter()
                    .position(|c| c == n)
                    .ok_or_else(|| Error::MissingColumn(n.to_string()))
            })
            .collect::<Result<_>>()?;
        let data = self
            .features
            .row_iter()
            .flat_map(|r| idx.iter().map(move |&j| r[j]))
            .collect();
        Dataset::new(
            DenseMatrix::new(self.len(), idx.len(), data)?,
            self.targets.clone(),
            names.iter().map(|s| s.to_string()).collect(),
        )
    }

    /// Writes a header of the column names plus `label`, then one row per
    /// point. Floats use the shortest representation that reads back exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{},label", self.column_names.join(","))?;
        for (r, t) in self.features.row_iter().zip(&self.targets) {
            for v in r {
                write!(w, "{v},")?;
            }
            writeln!(w, "{t}")?;
        }
        Ok(())
    }
}

/// Noise level δ ∈ [0, 1] and the seed of the generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub delta: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(delta: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(out_of_range("delta", delta, "noise level must lie in [0, 1]"));
        }
        Ok(NoiseSpec { delta, seed })
    }
}

fn names(ns: &[&str]) -> Vec<String> {
    ns.iter().map(|s| s.to_string()).collect()
}

/// Two classes on either side of `y = 1.2 − 0.5x`, with [`DEFAULT_JITTER`].
pub fn gen_linear_two_class(n: usize, x_lo: f64, x_hi: f64, noise: &NoiseSpec) -> Result<Dataset> {
    gen_linear_two_class_with_jitter(n, x_lo, x_hi, noise, DEFAULT_JITTER)
}

/// For each point: `x ~ U[x_lo, x_hi)`, `y = 1.2 − 0.5x`,
/// `y_δ = y(1 + δα)` with `α ~ U(−1, 1)`, then `y_point = y_δ + jitter·u`
/// with `u ~ U(−1, 1)`. The label is 1 iff `y_point − 1.2 + 0.5x > 0`.
pub fn gen_linear_two_class_with_jitter(
    n: usize,
    x_lo: f64,
    x_hi: f64,
    noise: &NoiseSpec,
    jitter: f64,
) -> Result<Dataset> {
    let noise = NoiseSpec::new(noise.delta, noise.seed)?;
    if n < 2 {
        return Err(out_of_range("n", n as f64, "need at least 2 points"));
    }
    if !(x_lo < x_hi) || !x_lo.is_finite() || !x_hi.is_finite() {
        return Err(out_of_range("x_lo", x_lo, "interval must satisfy x_lo < x_hi"));
    }
    if !(jitter >= 0.0 && jitter.is_finite()) {
        return Err(out_of_range("jitter", jitter, "must be >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut data = Vec::with_capacity(2 * n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.random_range(x_lo..x_hi);
        let y = LINE_INTERCEPT + LINE_SLOPE * x;
        let alpha = open_unit(&mut rng);
        let u = open_unit(&mut rng);
        let y_point = y * (1.0 + noise.delta * alpha) + jitter * u;
        data.extend_from_slice(&[x, y_point]);
        targets.push(u8::from(y_point - LINE_INTERCEPT - LINE_SLOPE * x > 0.0));
    }
    Dataset::new(DenseMatrix::new(n, 2, data)?, targets, names(&["x", "y"]))
}

/// Uniform on the open interval (−1, 1).
fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let v = rng.random_range(-1.0..1.0);
        if v != -1.0 {
            return v;
        }
    }
}

/// `n/2` points uniform in the disk of radius `r_inner` (class 1) and the
/// rest on the annulus `r_outer·(1 ± 0.1)` (class 0), interleaved.
///
/// Requires `r_inner < 0.9·r_outer` so that the classes cannot touch.
pub fn gen_circle_two_class(n: usize, r_inner: f64, r_outer: f64, seed: u64) -> Result<Dataset> {
    if !(r_inner > 0.0) {
        return Err(out_of_range("r_inner", r_inner, "must be > 0"));
    }
    if !(r_inner < 0.9 * r_outer) || !r_outer.is_finite() {
        return Err(out_of_range("r_outer", r_outer, "must exceed r_inner / 0.9"));
    }
    if n < 2 {
        return Err(out_of_range("n", n as f64, "need at least 2 points"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(2 * n);
    let mut targets = Vec::with_capacity(n);
    for i in 0..n {
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let inner = i % 2 == 1;
        let r = if inner {
            r_inner * rng.random_range(0.0..1.0f64).sqrt()
        } else {
            r_outer * (1.0 + 0.1 * rng.random_range(-1.0..=1.0))
        };
        data.extend_from_slice(&[r * angle.cos(), r * angle.sin()]);
        targets.push(u8::from(inner));
    }
    Dataset::new(DenseMatrix::new(n, 2, data)?, targets, names(&["x1", "x2"]))
}

/// Two isotropic Gaussian clouds centred at `(∓separation/2, 0)` with
/// standard deviation `sigma`; class 1 is the right-hand cloud.
pub fn gen_gaussian_two_class(n: usize, separation: f64, sigma: f64, seed: u64) -> Result<Dataset> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(out_of_range("sigma", sigma, "must be > 0"));
    }
    if !separation.is_finite() {
        return Err(out_of_range("separation", separation, "must be finite"));
    }
    if n < 2 {
        return Err(out_of_range("n", n as f64, "need at least 2 points"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).map_err(|_| out_of_range("sigma", sigma, "must be > 0"))?;
    let mut data = Vec::with_capacity(2 * n);
    let mut targets = Vec::with_capacity(n);
    for i in 0..n {
        let class = u8::from(i % 2 == 1);
        let cx = if class == 1 {
            0.5 * separation
        } else {
            -0.5 * separation
        };
        data.push(cx + normal.sample(&mut rng));
        data.push(normal.sample(&mut rng));
        targets.push(class);
    }
    Dataset::new(DenseMatrix::new(n, 2, data)?, targets, names(&["x1", "x2"]))
}

/// All `2^n_attrs` boolean vectors; the label copies attribute `target`
/// (0-based).
pub fn gen_boolean(n_attrs: usize, target: usize) -> Result<Dataset> {
    if !(1..=20).contains(&n_attrs) {
        return Err(out_of_range("attrs", n_attrs as f64, "must lie in [1, 20]"));
    }
    if target >= n_attrs {
        return Err(out_of_range("target", target as f64, "must index an attribute"));
    }
    let n = 1usize << n_attrs;
    let mut data = Vec::with_capacity(n * n_attrs);
    let mut targets = Vec::with_capacity(n);
    for bits in 0..n {
        for i in 0..n_attrs {
            data.push(((bits >> i) & 1) as f64);
        }
        targets.push(((bits >> target) & 1) as u8);
    }
    let cols = (1..=n_attrs).map(|i| format!("a{i}")).collect();
    Dataset::new(DenseMatrix::new(n, n_attrs, data)?, targets, cols)
}

/// How label-column values become classes.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelRule {
    /// Exact string matches; unmatched rows are skipped.
    Map(Vec<(String, u8)>),
    /// Numeric label column: 1 iff value > threshold.
    Above(f64),
}

impl LabelRule {
    fn apply(&self, raw: &str, line: usize) -> Result<Option<u8>> {
        match self {
            LabelRule::Map(pairs) => Ok(pairs.iter().find(|(k, _)| k == raw).map(|&(_, v)| v)),
            LabelRule::Above(level) => {
                let v: f64 = raw.trim().parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("label value `{raw}` is not numeric"),
                })?;
                Ok(Some(u8::from(v > *level)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvLoad {
    pub dataset: Dataset,
    /// Rows whose label was not mapped to a class.
    pub skipped: usize,
}

pub fn load_csv<P: AsRef<Path>>(
    path: P,
    feature_columns: &[&str],
    label_column: &str,
    rule: &LabelRule,
) -> Result<CsvLoad> {
    read_csv(File::open(path)?, feature_columns, label_column, rule)
}

/// Comma-separated, header row first.
pub fn read_csv<R: Read>(reader: R, feature_columns: &[&str], label_column: &str, rule: &LabelRule) -> Result<CsvLoad> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(Error::Parse {
            line: 1,
            message: "empty file (no header row)".into(),
        });
    }
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let feature_idx: Vec<usize> = feature_columns.iter().map(|c| find(c)).collect::<Result<_>>()?;
    let label_idx = find(label_column)?;

    let mut data = Vec::new();
    let mut targets = Vec::new();
    let mut skipped = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(e, 0))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != headers.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", headers.len(), rec.len()),
            });
        }
        let Some(class) = rule.apply(&rec[label_idx], line)? else {
            skipped += 1;
            continue;
        };
        for &j in &feature_idx {
            let v: f64 = rec[j].parse().map_err(|_| Error::Parse {
                line,
                message: format!("`{}` in column `{}` is not a number", &rec[j], &headers[j]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value in column `{}`", &headers[j]),
                });
            }
            data.push(v);
        }
        targets.push(class);
    }
    let n = targets.len();
    let dataset = Dataset::new(
        DenseMatrix::new(n, feature_idx.len(), data)?,
        targets,
        names(feature_columns),
    )?;
    Ok(CsvLoad { dataset, skipped })
}

fn csv_error(e: csv::Error, fallback_line: usize) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Reads an `n × n` grid of values, one grid row per line, no header.
pub fn load_field_csv<P: AsRef<Path>>(path: P) -> Result<DenseMatrix> {
    read_field_csv(File::open(path)?)
}

pub fn read_field_csv<R: Read>(reader: R) -> Result<DenseMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(e, 0))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{s}` is not a number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
        return Err(Error::EmptyGrid);
    }
    DenseMatrix::from_rows(&rows)
}

/// Each node `(row, col)` of an `n × n` grid becomes the point
/// `(col/(n−1), row/(n−1))` of the unit square, labelled 1 iff its value
/// exceeds `threshold`.
pub fn segment_field(values: &DenseMatrix, threshold: f64) -> Result<Dataset> {
    let n = values.rows();
    if n == 0 || values.cols() != n {
        return Err(Error::EmptyGrid);
    }
    let h = if n > 1 { 1.0 / (n - 1) as f64 } else { 0.0 };
    let mut data = Vec::with_capacity(2 * n * n);
    let mut targets = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            data.extend_from_slice(&[col as f64 * h, row as f64 * h]);
            targets.push(u8::from(values.get(row, col) > threshold));
        }
    }
    Dataset::new(DenseMatrix::new(n * n, 2, data)?, targets, names(&["x1", "x2"]))
}

/// Radially symmetric field `peak·exp(−r²/width²)` on an `n × n` grid of the
/// unit square, `r` measured from the centre.
pub fn gen_bump_field(n: usize, peak: f64, width: f64) -> Result<DenseMatrix> {
    if n < 2 {
        return Err(Error::EmptyGrid);
    }
    if !(width > 0.0) {
        return Err(out_of_range("width", width, "must be > 0"));
    }
    let h = 1.0 / (n - 1) as f64;
    let mut data = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            let (x, y) = (col as f64 * h - 0.5, row as f64 * h - 0.5);
            data.push(peak * (-(x * x + y * y) / (width * width)).exp());
        }
    }
    DenseMatrix::new(n, n, data)
}

pub fn write_field_csv<W: Write>(values: &DenseMatrix, mut w: W) -> std::io::Result<()> {
    for r in values.row_iter() {
        let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
