//! Datasets: loading, synthetic generators, label noise and standardization.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seed;

/// A labelled point set: `n` rows of dimension `dim`, labels in `0..n_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    /// Original label text for each contiguous class id.
    label_values: Vec<String>,
    name: String,
    /// Direction of the generating halfspace, when one exists.
    target: Option<Vec<f64>>,
}

impl Dataset {
    /// Build a dataset from features and contiguous labels.
    ///
    /// `n_classes` is taken as `max(label) + 1`; use [`Dataset::with_classes`]
    /// to declare classes that may not appear in `labels`.
    pub fn new(features: Array2<f64>, labels: Vec<usize>, name: impl Into<String>) -> Result<Self> {
        let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
        Self::with_classes(features, labels, n_classes, name)
    }

    pub fn with_classes(
        features: Array2<f64>,
        labels: Vec<usize>,
        n_classes: usize,
        name: impl Into<String>,
    ) -> Result<Self> {
        let (n, dim) = features.dim();
        if n == 0 {
            return invalid("dataset has no rows");
        }
        if dim == 0 {
            return invalid("dataset has no feature columns");
        }
        if labels.len() != n {
            return invalid(format!("{} labels for {} rows", labels.len(), n));
        }
        if let Some(bad) = labels.iter().find(|&&y| y >= n_classes) {
            return invalid(format!("label {bad} outside 0..{n_classes}"));
        }
        if let Some(((i, j), v)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return invalid(format!("non-finite feature {v} at row {i}, column {j}"));
        }
        Ok(Self {
            features,
            labels,
            n_classes,
            label_values: (0..n_classes).map(|c| c.to_string()).collect(),
            name: name.into(),
            target: None,
        })
    }

    pub fn with_label_values(mut self, values: Vec<String>) -> Result<Self> {
        if values.len() != self.n_classes {
            return invalid(format!(
                "{} label values for {} classes",
                values.len(),
                self.n_classes
            ));
        }
        self.label_values = values;
        Ok(self)
    }

    pub fn with_target(mut self, target: Vec<f64>) -> Result<Self> {
        if target.len() != self.dim() {
            return invalid("target direction has the wrong dimension");
        }
        self.target = Some(target);
        Ok(self)
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn label_values(&self) -> &[String] {
        &self.label_values
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn target(&self) -> Option<&[f64]> {
        self.target.as_deref()
    }

    /// Same points, different labels. Class count and label values are kept.
    pub fn relabel(&self, labels: Vec<usize>) -> Result<Self> {
        let mut out = Self::with_classes(
            self.features.clone(),
            labels,
            self.n_classes,
            self.name.clone(),
        )?;
        out.label_values = self.label_values.clone();
        out.target = self.target.clone();
        Ok(out)
    }

    /// Rows `indices` in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n()) {
            return invalid(format!("row {bad} out of range for n={}", self.n()));
        }
        let features = self.features.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        let mut out = Self::with_classes(features, labels, self.n_classes, self.name.clone())?;
        out.label_values = self.label_values.clone();
        out.target = self.target.clone();
        Ok(out)
    }

    /// Per-column standardization to zero mean and unit variance.
    /// Constant columns are only centered.
    pub fn standardize(&self) -> Self {
        let mut features = self.features.clone();
        let n = features.nrows() as f64;
        for mut col in features.axis_iter_mut(Axis(1)) {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            col.mapv_inplace(|v| if sd > 0.0 { (v - mean) / sd } else { v - mean });
        }
        Self {
            features,
            ..self.clone()
        }
    }

    /// Index lists per class id.
    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_classes];
        for (i, &y) in self.labels.iter().enumerate() {
            out[y].push(i);
        }
        out
    }
}

/// On-disk dataset formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    /// `label,f1,f2,...` per line, no header.
    DenseCsv,
    /// `label idx:val idx:val ...` with 1-based indices.
    SparseText,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense-csv" | "csv" => Ok(Format::DenseCsv),
            "sparse-text" | "sparse" | "svmlight" => Ok(Format::SparseText),
            other => invalid(format!("unknown dataset format {other:?}")),
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, format: Format) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    parse_dataset(&text, format, name)
}

pub fn parse_dataset(text: &str, format: Format, name: impl Into<String>) -> Result<Dataset> {
    let rows = match format {
        Format::DenseCsv => parse_csv_rows(text)?,
        Format::SparseText => parse_sparse_rows(text)?,
    };
    if rows.is_empty() {
        return invalid("empty dataset file");
    }
    let dim = rows.iter().map(|(_, x)| x.len()).max().unwrap_or(0);
    let mut features = Array2::zeros((rows.len(), dim));
    for (i, (_, x)) in rows.iter().enumerate() {
        for (j, &v) in x.iter().enumerate() {
            features[[i, j]] = v;
        }
    }
    let raw: Vec<&str> = rows.iter().map(|(label, _)| label.as_str()).collect();
    let (labels, values) = remap_labels(&raw);
    Dataset::with_classes(features, labels, values.len(), name)?.with_label_values(values)
}

fn parse_csv_rows(text: &str) -> Result<Vec<(String, Vec<f64>)>> {
    let mut rows = Vec::new();
    let mut width = None;
    for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() {
            continue;
        }
        let mut cells = line.split(',').map(str::trim);
        let label = cells.next().unwrap_or_default();
        if label.is_empty() {
            return Err(Error::Format {
                line: lineno,
                msg: "missing label".into(),
            });
        }
        let x = cells
            .map(|c| parse_value(c, lineno))
            .collect::<Result<Vec<_>>>()?;
        if x.is_empty() {
            return Err(Error::Format {
                line: lineno,
                msg: "no feature columns".into(),
            });
        }
        match width {
            None => width = Some(x.len()),
            Some(w) if w != x.len() => {
                return Err(Error::Format {
                    line: lineno,
                    msg: format!("expected {w} features, found {}", x.len()),
                })
            }
            _ => {}
        }
        rows.push((label.to_string(), x));
    }
    Ok(rows)
}

fn parse_sparse_rows(text: &str) -> Result<Vec<(String, Vec<f64>)>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l)) {
        let line = line.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = tokens.next().unwrap_or_default().to_string();
        let mut x: Vec<f64> = Vec::new();
        let mut seen = BTreeSet::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Format {
                line: lineno,
                msg: format!("expected idx:val, found {tok:?}"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Format {
                line: lineno,
                msg: format!("bad feature index {idx:?}"),
            })?;
            if idx == 0 {
                return Err(Error::Format {
                    line: lineno,
                    msg: "feature indices are 1-based".into(),
                });
            }
            if !seen.insert(idx) {
                return Err(Error::Format {
                    line: lineno,
                    msg: format!("duplicate index {idx}"),
                });
            }
            let val = parse_value(val, lineno)?;
            if x.len() < idx {
                x.resize(idx, 0.0);
            }
            x[idx - 1] = val;
        }
        rows.push((label, x));
    }
    if !rows.is_empty() && rows.iter().all(|(_, x)| x.is_empty()) {
        return Err(Error::Format {
            line: 1,
            msg: "no feature entries in file".into(),
        });
    }
    Ok(rows)
}

fn parse_value(cell: &str, line: usize) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(Error::Format {
            line,
            msg: format!("non-finite value {v}"),
        }),
        Err(_) => Err(Error::Format {
            line,
            msg: format!("non-numeric value {cell:?}"),
        }),
    }
}

/// Map raw label text to contiguous ids. Numeric labels sort by value,
/// anything else sorts lexically.
fn remap_labels(raw: &[&str]) -> (Vec<usize>, Vec<String>) {
    let mut distinct: Vec<&str> = raw
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let numeric: Option<Vec<f64>> = distinct.iter().map(|s| s.parse::<f64>().ok()).collect();
    if numeric.is_some() {
        distinct.sort_by(|a, b| {
            let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
            x.partial_cmp(&y)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.cmp(b))
        });
    }
    let ids: HashMap<&str, usize> = distinct.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let labels = raw.iter().map(|s| ids[s]).collect();
    (labels, distinct.into_iter().map(String::from).collect())
}

/// Serialize in the dense CSV format, writing original label values.
pub fn to_dense_csv(d: &Dataset) -> String {
    let mut out = String::new();
    for (row, &y) in d.features.rows().into_iter().zip(&d.labels) {
        out.push_str(&d.label_values[y]);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Serialize in the sparse format. The last column is always written so the
/// dimension survives a round trip.
pub fn to_sparse_text(d: &Dataset) -> String {
    let mut out = String::new();
    let last = d.dim() - 1;
    for (row, &y) in d.features.rows().into_iter().zip(&d.labels) {
        out.push_str(&d.label_values[y]);
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 || j == last {
                let _ = write!(out, " {}:{v}", j + 1);
            }
        }
        out.push('\n');
    }
    out
}

/// `n` points uniform in the unit disk, labelled by a random direction `mu`.
///
/// Label 1 is the side with `<mu, x> >= 0`, label 0 the other. The direction
/// is available through [`Dataset::target`].
pub fn generate_uniform_disk(n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return invalid("uniform disk needs n >= 1");
    }
    let mut rng = seed::rng(seed);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let mu = [phi.cos(), phi.sin()];
    let mut features = Array2::zeros((n, 2));
    let mut labels = Vec::with_capacity(n);
    for mut row in features.rows_mut() {
        // r = sqrt(u) is uniform in area
        let r = rng.random::<f64>().sqrt();
        let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        row[0] = r * a.cos();
        row[1] = r * a.sin();
        let dot = mu[0] * row[0] + mu[1] * row[1];
        labels.push(usize::from(dot >= 0.0));
    }
    Dataset::with_classes(features, labels, 2, format!("disk-{n}"))?
        .with_label_values(vec!["-1".into(), "1".into()])?
        .with_target(mu.to_vec())
}

/// `n_classes` isotropic Gaussian clusters centred on the scaled standard
/// simplex vertices `e_c` of `R^n_classes`. Rows are ordered class by class.
pub fn generate_gaussian_blobs(
    n_classes: usize,
    per_class: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_classes < 2 {
        return invalid("blobs need at least 2 classes");
    }
    if per_class == 0 {
        return invalid("blobs need at least one point per class");
    }
    if !(spread > 0.0 && spread.is_finite()) {
        return invalid("blob spread must be positive");
    }
    let normal = Normal::new(0.0, spread).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = seed::rng(seed);
    let n = n_classes * per_class;
    let mut features = Array2::zeros((n, n_classes));
    let mut labels = Vec::with_capacity(n);
    for (i, mut row) in features.rows_mut().into_iter().enumerate() {
        let c = i / per_class;
        for (j, v) in row.iter_mut().enumerate() {
            let center = if j == c { 1.0 } else { 0.0 };
            *v = center + normal.sample(&mut rng);
        }
        labels.push(c);
    }
    Dataset::with_classes(
        features,
        labels,
        n_classes,
        format!("blobs-{n_classes}x{per_class}"),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// Every label flips independently with probability `level`.
    Bounded,
    /// Exactly `floor(level * n)` labels flip.
    Adversarial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub level: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let max = match self.kind {
            NoiseKind::Bounded => 0.5,
            NoiseKind::Adversarial => 1.0,
        };
        if !(0.0..=max).contains(&self.level) {
            return invalid(format!(
                "{:?} noise level {} outside [0, {max}]",
                self.kind, self.level
            ));
        }
        Ok(())
    }
}

/// Flip labels according to `model`.
///
/// A flip sends a binary label to the other class and a multi-class label to
/// a uniformly drawn different class. Adversarial noise targets the points
/// closest to the generating hyperplane when the dataset carries a target
/// direction, and a uniform random subset otherwise.
pub fn apply_noise(d: &Dataset, model: &NoiseModel) -> Result<Dataset> {
    model.validate()?;
    let mut rng = seed::rng(model.seed);
    let n = d.n();
    let flips: Vec<usize> = match model.kind {
        NoiseKind::Bounded => (0..n).filter(|_| rng.random_bool(model.level)).collect(),
        NoiseKind::Adversarial => {
            let count = (model.level * n as f64).floor() as usize;
            match d.target() {
                Some(mu) => {
                    let mut order: Vec<(f64, usize)> = (0..n)
                        .map(|i| {
                            let m: f64 = d.point(i).iter().zip(mu).map(|(a, b)| a * b).sum();
                            (m.abs(), i)
                        })
                        .collect();
                    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    let mut idx: Vec<usize> =
                        order.into_iter().take(count).map(|(_, i)| i).collect();
                    idx.sort_unstable();
                    idx
                }
                None => {
                    let mut idx = sample(&mut rng, n, count).into_vec();
                    idx.sort_unstable();
                    idx
                }
            }
        }
    };
    let mut labels = d.labels.clone();
    let c = d.n_classes.max(2);
    for i in flips {
        let y = labels[i];
        labels[i] = if c == 2 {
            1 - y
        } else {
            let other = rng.random_range(0..c - 1);
            if other >= y {
                other + 1
            } else {
                other
            }
        };
    }
    let mut out = d.clone();
    out.n_classes = c;
    if out.label_values.len() < c {
        out.label_values = (0..c).map(|i| i.to_string()).collect();
    }
    out.labels = labels;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_two_rows() {
        let d = parse_dataset("1,0.5,0.5\n2,1.0,1.0", Format::DenseCsv, "t").unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.labels(), &[0, 1]);
        assert_eq!(d.label_values(), &["1".to_string(), "2".to_string()]);
    }

    #[test]
    fn csv_non_numeric_names_line() {
        let err = parse_dataset("1,0.5,0.5\n2,abc,1.0\n", Format::DenseCsv, "t").unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_ragged_row_rejected() {
        let err = parse_dataset("0,1,2\n1,3\n", Format::DenseCsv, "t").unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }));
    }

    #[test]
    fn empty_file_is_invalid() {
        assert!(matches!(
            parse_dataset("\n\n", Format::DenseCsv, "t"),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            parse_dataset("", Format::SparseText, "t"),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn sparse_line_fills_zeros() {
        let d = parse_dataset("1 1:0.5 3:2.0\n", Format::SparseText, "t").unwrap();
        assert_eq!(d.point(0).to_vec(), vec![0.5, 0.0, 2.0]);
    }

    #[test]
    fn sparse_rejects_zero_index() {
        let err = parse_dataset("1 0:0.5\n", Format::SparseText, "t").unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }));
    }

    #[test]
    fn numeric_labels_sorted_by_value() {
        let d = parse_dataset("+1 1:1\n-1 1:2\n10 1:3\n2 1:4\n", Format::SparseText, "t").unwrap();
        assert_eq!(d.labels(), &[1, 0, 3, 2]);
    }

    #[test]
    fn disk_points_inside_and_consistent() {
        let d = generate_uniform_disk(1000, 7).unwrap();
        let mu = d.target().unwrap().to_vec();
        assert!((mu[0].hypot(mu[1]) - 1.0).abs() < 1e-12);
        for i in 0..d.n() {
            let p = d.point(i);
            assert!(p[0].hypot(p[1]) <= 1.0);
            let dot = p[0] * mu[0] + p[1] * mu[1];
            assert_eq!(d.labels()[i], usize::from(dot >= 0.0));
        }
        assert_eq!(d, generate_uniform_disk(1000, 7).unwrap());
    }

    #[test]
    fn disk_halves_balanced() {
        let d = generate_uniform_disk(100_000, 3).unwrap();
        let pos = d.labels().iter().filter(|&&y| y == 1).count() as f64 / 1e5;
        assert!((pos - 0.5).abs() <= 0.01, "{pos}");
    }

    #[test]
    fn disk_rejects_zero() {
        assert!(generate_uniform_disk(0, 1).is_err());
    }

    #[test]
    fn blobs_shape_and_degenerate_spread() {
        let d = generate_gaussian_blobs(3, 50, 0.2, 1).unwrap();
        assert_eq!(d.n(), 150);
        assert_eq!(d.n_classes(), 3);
        let tight = generate_gaussian_blobs(3, 4, 1e-14, 1).unwrap();
        for i in 0..tight.n() {
            let c = tight.labels()[i];
            for (j, v) in tight.point(i).iter().enumerate() {
                let center = if j == c { 1.0 } else { 0.0 };
                assert!((v - center).abs() < 1e-12);
            }
        }
        assert!(generate_gaussian_blobs(1, 5, 0.1, 0).is_err());
        assert!(generate_gaussian_blobs(2, 0, 0.1, 0).is_err());
        assert!(generate_gaussian_blobs(2, 5, 0.0, 0).is_err());
    }

    #[test]
    fn noise_zero_is_identity() {
        let d = generate_uniform_disk(200, 5).unwrap();
        for kind in [NoiseKind::Bounded, NoiseKind::Adversarial] {
            let m = NoiseModel {
                kind,
                level: 0.0,
                seed: 9,
            };
            assert_eq!(apply_noise(&d, &m).unwrap(), d);
        }
    }

    #[test]
    fn bounded_half_flips_half() {
        let d = generate_uniform_disk(100_000, 1).unwrap();
        let m = NoiseModel {
            kind: NoiseKind::Bounded,
            level: 0.5,
            seed: 4,
        };
        let noisy = apply_noise(&d, &m).unwrap();
        let flipped = d
            .labels()
            .iter()
            .zip(noisy.labels())
            .filter(|(a, b)| a != b)
            .count();
        assert!((flipped as f64 / 1e5 - 0.5).abs() <= 0.01);
    }

    #[test]
    fn adversarial_exact_count_near_boundary() {
        let d = generate_uniform_disk(100, 2).unwrap();
        let m = NoiseModel {
            kind: NoiseKind::Adversarial,
            level: 0.1,
            seed: 0,
        };
        let noisy = apply_noise(&d, &m).unwrap();
        let flipped: Vec<usize> = (0..100)
            .filter(|&i| d.labels()[i] != noisy.labels()[i])
            .collect();
        assert_eq!(flipped.len(), 10);
        let mu = d.target().unwrap();
        let margin = |i: usize| (d.point(i)[0] * mu[0] + d.point(i)[1] * mu[1]).abs();
        let worst_flipped = flipped.iter().map(|&i| margin(i)).fold(0.0, f64::max);
        let kept_min = (0..100)
            .filter(|i| !flipped.contains(i))
            .map(margin)
            .fold(f64::INFINITY, f64::min);
        assert!(worst_flipped <= kept_min);
    }

    #[test]
    fn adversarial_without_target_is_random_but_exact() {
        let d = generate_gaussian_blobs(3, 20, 0.1, 0).unwrap();
        let m = NoiseModel {
            kind: NoiseKind::Adversarial,
            level: 0.25,
            seed: 3,
        };
        let noisy = apply_noise(&d, &m).unwrap();
        let flipped = d
            .labels()
            .iter()
            .zip(noisy.labels())
            .filter(|(a, b)| a != b)
            .count();
        assert_eq!(flipped, 15);
    }

    #[test]
    fn noise_level_range_checked() {
        let d = generate_uniform_disk(10, 0).unwrap();
        let m = NoiseModel {
            kind: NoiseKind::Bounded,
            level: 0.6,
            seed: 0,
        };
        assert!(apply_noise(&d, &m).is_err());
        let m = NoiseModel {
            kind: NoiseKind::Adversarial,
            level: 1.2,
            seed: 0,
        };
        assert!(apply_noise(&d, &m).is_err());
    }

    #[test]
    fn standardize_columns() {
        let d = generate_gaussian_blobs(2, 30, 0.4, 8)
            .unwrap()
            .standardize();
        for col in d.features().columns() {
            let mean = col.sum() / col.len() as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64;
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-9);
        }
    }
}
