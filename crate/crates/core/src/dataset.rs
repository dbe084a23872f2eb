//! Tabular data ingestion and preparation.
//!
//! A [`Dataset`] is a dense feature matrix, binary labels (1 = minority /
//! default) and the [`FeatureSchema`] describing each column. Preparation is
//! always: [`load_csv`] → [`apply_caps`] → [`stratified_split`] →
//! [`fit_scaler`] on the training partition only → [`ScalerParams::transform`]
//! on both partitions.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    Continuous,
    DiscreteInteger,
}

/// One predictor column with optional clamping bounds (original units).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_high: Option<f64>,
}

impl FeatureSpec {
    pub fn continuous(name: &str) -> Self {
        Self {
            name: name.to_string(),
            kind: FeatureKind::Continuous,
            cap_low: None,
            cap_high: None,
        }
    }

    pub fn discrete(name: &str) -> Self {
        Self {
            kind: FeatureKind::DiscreteInteger,
            ..Self::continuous(name)
        }
    }

    pub fn with_caps(mut self, low: Option<f64>, high: Option<f64>) -> Self {
        self.cap_low = low;
        self.cap_high = high;
        self
    }

    /// Clamp `value` into `[cap_low, cap_high]`.
    pub fn clamp(&self, value: f64) -> f64 {
        let mut v = value;
        if let Some(lo) = self.cap_low {
            v = v.max(lo);
        }
        if let Some(hi) = self.cap_high {
            v = v.min(hi);
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSchema {
    pub features: Vec<FeatureSpec>,
    pub target: String,
}

impl FeatureSchema {
    pub fn new(features: Vec<FeatureSpec>, target: &str) -> Result<Self> {
        let schema = Self {
            features,
            target: target.to_string(),
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::Schema("schema declares no features".into()));
        }
        let mut seen = HashSet::new();
        for f in &self.features {
            if !seen.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature name `{}`", f.name)));
            }
            if f.name == self.target {
                return Err(Error::Schema(format!(
                    "target `{}` is also listed as a feature",
                    self.target
                )));
            }
            for cap in [f.cap_low, f.cap_high].into_iter().flatten() {
                if !cap.is_finite() {
                    return Err(Error::Schema(format!("non-finite cap on `{}`", f.name)));
                }
                if f.kind == FeatureKind::DiscreteInteger && cap.fract() != 0.0 {
                    return Err(Error::Schema(format!(
                        "discrete feature `{}` has non-integer cap {cap}",
                        f.name
                    )));
                }
            }
            if let (Some(lo), Some(hi)) = (f.cap_low, f.cap_high) {
                if lo >= hi {
                    return Err(Error::Schema(format!(
                        "feature `{}`: cap_low {lo} must be below cap_high {hi}",
                        f.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }
}

/// Feature matrix, binary labels and schema. Label 1 is the minority class.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Vec<u8>,
    pub schema: FeatureSchema,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Vec<u8>, schema: FeatureSchema) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Schema(format!(
                "{} feature rows but {} labels",
                x.nrows(),
                y.len()
            )));
        }
        if x.ncols() != schema.n_features() {
            return Err(Error::Schema(format!(
                "matrix has {} columns, schema declares {}",
                x.ncols(),
                schema.n_features()
            )));
        }
        if let Some(bad) = y.iter().find(|&&l| l > 1) {
            return Err(Error::Schema(format!("label {bad} is not binary")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Schema("feature matrix contains non-finite values".into()));
        }
        Ok(Self { x, y, schema })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_positive(&self) -> usize {
        self.y.iter().filter(|&&l| l == 1).count()
    }

    pub fn n_negative(&self) -> usize {
        self.n_rows() - self.n_positive()
    }

    pub fn positive_rate(&self) -> f64 {
        if self.n_rows() == 0 {
            return 0.0;
        }
        self.n_positive() as f64 / self.n_rows() as f64
    }

    /// Rows in the given order (duplicates allowed).
    pub fn select(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(Axis(0), rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            schema: self.schema.clone(),
        }
    }

    /// Feature rows carrying `label`, in original order.
    pub fn class_matrix(&self, label: u8) -> Array2<f64> {
        let rows: Vec<usize> = (0..self.n_rows()).filter(|&i| self.y[i] == label).collect();
        self.x.select(Axis(0), &rows)
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.x.column(j)
    }

    /// Append `other`'s rows below this dataset's rows.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.schema != other.schema {
            return Err(Error::Schema("cannot concatenate datasets with different schemas".into()));
        }
        let x = ndarray::concatenate(Axis(0), &[self.x.view(), other.x.view()])
            .map_err(|e| Error::Schema(e.to_string()))?;
        let mut y = self.y.clone();
        y.extend_from_slice(&other.y);
        Ok(Dataset {
            x,
            y,
            schema: self.schema.clone(),
        })
    }

    /// SHA-256 over shape, values (little-endian bit patterns) and labels.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n_rows() as u64).to_le_bytes());
        hasher.update((self.n_features() as u64).to_le_bytes());
        for v in self.x.iter() {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hasher.update(&self.y);
        hex::encode(hasher.finalize())
    }

    /// Write a header + rows CSV with the target as the last column.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<&str> = self.schema.names().collect();
        header.push(&self.schema.target);
        w.write_record(&header)?;
        for (row, label) in self.x.rows().into_iter().zip(&self.y) {
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            record.push(label.to_string());
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Result of [`load_csv`]: the clean rows plus how many were discarded.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub dataset: Dataset,
    pub dropped_rows: usize,
}

pub fn load_csv(path: &Path, schema: &FeatureSchema) -> Result<Loaded> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_csv_from_reader(file, schema)
}

fn parse_cell(raw: &str) -> Option<f64> {
    let s = raw.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("na") {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parse an RFC-4180 CSV with a header row. Rows with a missing or
/// unparseable value in any schema column (or a non-binary target) are
/// dropped; other columns are ignored.
pub fn load_csv_from_reader<R: Read>(reader: R, schema: &FeatureSchema) -> Result<Loaded> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Schema(format!("column `{name}` not found in header")))
    };
    let feature_cols = schema.names().map(position).collect::<Result<Vec<_>>>()?;
    let target_col = position(&schema.target)?;

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = 0usize;
    let mut row = Vec::with_capacity(feature_cols.len());
    for record in rdr.records() {
        let record = record?;
        row.clear();
        let mut ok = true;
        for &c in &feature_cols {
            match record.get(c).and_then(parse_cell) {
                Some(v) => row.push(v),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        let label = record.get(target_col).and_then(parse_cell).and_then(|v| {
            if v == 0.0 {
                Some(0u8)
            } else if v == 1.0 {
                Some(1u8)
            } else {
                None
            }
        });
        match (ok, label) {
            (true, Some(l)) => {
                values.extend_from_slice(&row);
                labels.push(l);
            }
            _ => dropped += 1,
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if dropped > 0 {
        log::info!("dropped {dropped} rows with missing or unparseable values");
    }
    let x = Array2::from_shape_vec((labels.len(), feature_cols.len()), values)
        .map_err(|e| Error::Schema(e.to_string()))?;
    Ok(Loaded {
        dataset: Dataset::new(x, labels, schema.clone())?,
        dropped_rows: dropped,
    })
}

/// Clamp every value into its feature's caps. Row count is unchanged.
pub fn apply_caps(d: &Dataset) -> Dataset {
    let mut out = d.clone();
    for (j, spec) in d.schema.features.iter().enumerate() {
        if spec.cap_low.is_none() && spec.cap_high.is_none() {
            continue;
        }
        out.x.column_mut(j).mapv_inplace(|v| spec.clamp(v));
    }
    out
}

#[derive(Clone, Debug)]
pub struct SplitResult {
    pub train: Dataset,
    pub test: Dataset,
    /// Source row indices of each partition, ascending.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub train_fraction: f64,
    pub seed: u64,
}

fn round_half_up(x: f64) -> usize {
    // The slack absorbs representation error such as 5 * 0.7 = 3.4999999999999996.
    (x + 0.5 + 1e-9).floor().max(0.0) as usize
}

/// Per-class train sizes: each class rounds `count * fraction` half-up, then
/// the larger class absorbs the difference to the global rounded train size.
pub fn stratified_allocation(class_counts: [usize; 2], train_fraction: f64) -> [usize; 2] {
    let total = class_counts[0] + class_counts[1];
    let target = round_half_up(total as f64 * train_fraction);
    let mut alloc = class_counts.map(|c| round_half_up(c as f64 * train_fraction));
    let larger = if class_counts[0] >= class_counts[1] { 0 } else { 1 };
    let sum = alloc[0] + alloc[1];
    if sum > target {
        alloc[larger] -= (sum - target).min(alloc[larger]);
    } else if sum < target {
        alloc[larger] += target - sum;
    }
    for (a, &c) in alloc.iter_mut().zip(&class_counts) {
        *a = (*a).clamp(1, c - 1);
    }
    alloc
}

/// Stratified train/test split. Deterministic for a fixed seed.
pub fn stratified_split(d: &Dataset, train_fraction: f64, seed: u64) -> Result<SplitResult> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in d.y.iter().enumerate() {
        by_class[l as usize].push(i);
    }
    for (label, rows) in by_class.iter().enumerate() {
        if rows.len() < 2 {
            return Err(Error::Stratification(format!(
                "class {label} has {} member(s); at least 2 required",
                rows.len()
            )));
        }
    }
    let alloc = stratified_allocation([by_class[0].len(), by_class[1].len()], train_fraction);

    let mut train_indices = Vec::new();
    let mut test_indices = Vec::new();
    for (label, rows) in by_class.iter_mut().enumerate() {
        let mut r = rng::stream(seed, label as u64);
        rows.shuffle(&mut r);
        train_indices.extend_from_slice(&rows[..alloc[label]]);
        test_indices.extend_from_slice(&rows[alloc[label]..]);
    }
    train_indices.sort_unstable();
    test_indices.sort_unstable();

    Ok(SplitResult {
        train: d.select(&train_indices),
        test: d.select(&test_indices),
        train_indices,
        test_indices,
        train_fraction,
        seed,
    })
}

/// Per-feature standardization parameters fitted on training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
}

/// Fit means and population standard deviations (`ddof = 0`) on `train`.
pub fn fit_scaler(train: &Dataset) -> Result<ScalerParams> {
    let n = train.n_rows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "fitting a scaler needs at least 2 rows, got {n}"
        )));
    }
    let mut means = Vec::with_capacity(train.n_features());
    let mut std_devs = Vec::with_capacity(train.n_features());
    for (j, spec) in train.schema.features.iter().enumerate() {
        let col = train.x.column(j);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
        if !(sd > 1e-12 * mean.abs().max(1.0)) {
            return Err(Error::DegenerateScale {
                feature: spec.name.clone(),
            });
        }
        means.push(mean);
        std_devs.push(sd);
    }
    Ok(ScalerParams { means, std_devs })
}

impl ScalerParams {
    pub fn n_features(&self) -> usize {
        self.means.len()
    }

    fn check_arity(&self, cols: usize) -> Result<()> {
        if cols != self.n_features() {
            return Err(Error::Schema(format!(
                "scaler fitted on {} features, data has {cols}",
                self.n_features()
            )));
        }
        Ok(())
    }

    pub fn transform_matrix(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_arity(x.ncols())?;
        let mut out = x.clone();
        for ((mut col, &m), &s) in out.columns_mut().into_iter().zip(&self.means).zip(&self.std_devs) {
            col.mapv_inplace(|v| (v - m) / s);
        }
        Ok(out)
    }

    pub fn inverse_transform_matrix(&self, z: &Array2<f64>) -> Result<Array2<f64>> {
        self.check_arity(z.ncols())?;
        let mut out = z.clone();
        for ((mut col, &m), &s) in out.columns_mut().into_iter().zip(&self.means).zip(&self.std_devs) {
            col.mapv_inplace(|v| v * s + m);
        }
        Ok(out)
    }

    /// Map every feature to `(x - mean) / std_dev`.
    pub fn transform(&self, d: &Dataset) -> Result<Dataset> {
        Ok(Dataset {
            x: self.transform_matrix(&d.x)?,
            y: d.y.clone(),
            schema: d.schema.clone(),
        })
    }

    pub fn inverse_transform(&self, d: &Dataset) -> Result<Dataset> {
        Ok(Dataset {
            x: self.inverse_transform_matrix(&d.x)?,
            y: d.y.clone(),
            schema: d.schema.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn schema2() -> FeatureSchema {
        FeatureSchema::new(
            vec![
                FeatureSpec::continuous("age").with_caps(Some(21.0), Some(85.0)),
                FeatureSpec::continuous("income").with_caps(Some(0.0), Some(25_000.0)),
            ],
            "target",
        )
        .unwrap()
    }

    #[test]
    fn schema_rejects_bad_definitions() {
        let dup = FeatureSchema::new(
            vec![FeatureSpec::continuous("a"), FeatureSpec::continuous("a")],
            "t",
        );
        assert!(matches!(dup, Err(Error::Schema(_))));
        let target_clash = FeatureSchema::new(vec![FeatureSpec::continuous("t")], "t");
        assert!(target_clash.is_err());
        let inverted = FeatureSchema::new(
            vec![FeatureSpec::continuous("a").with_caps(Some(5.0), Some(1.0))],
            "t",
        );
        assert!(inverted.is_err());
        let fractional = FeatureSchema::new(
            vec![FeatureSpec::discrete("n").with_caps(Some(0.0), Some(2.5))],
            "t",
        );
        assert!(fractional.is_err());
    }

    #[test]
    fn loads_and_drops_incomplete_rows() {
        let csv = "id,age,income,target\n\
                   1,30,4000,0\n\
                   2,41,,1\n\
                   3,52,5200,0\n\
                   4,63,NA,0\n\
                   5,25,3100,1\n";
        let loaded = load_csv_from_reader(csv.as_bytes(), &schema2()).unwrap();
        assert_eq!(loaded.dataset.n_rows(), 3);
        assert_eq!(loaded.dropped_rows, 2);
        assert_eq!(loaded.dataset.y, vec![0, 0, 1]);
        assert_eq!(loaded.dataset.x.row(1).to_vec(), vec![52.0, 5200.0]);
    }

    #[test]
    fn single_clean_row_loads() {
        let csv = "age,income,target\n30,1000,1\n";
        let loaded = load_csv_from_reader(csv.as_bytes(), &schema2()).unwrap();
        assert_eq!(loaded.dataset.n_rows(), 1);
        assert_eq!(loaded.dropped_rows, 0);
    }

    #[test]
    fn missing_column_and_empty_file_errors() {
        let csv = "age,target\n30,1\n";
        assert!(matches!(
            load_csv_from_reader(csv.as_bytes(), &schema2()),
            Err(Error::Schema(_))
        ));
        let csv = "age,income,target\n30,,1\n";
        assert!(matches!(
            load_csv_from_reader(csv.as_bytes(), &schema2()),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn non_binary_target_is_dropped() {
        let csv = "age,income,target\n30,1,2\n31,1,1\n";
        let loaded = load_csv_from_reader(csv.as_bytes(), &schema2()).unwrap();
        assert_eq!(loaded.dataset.n_rows(), 1);
        assert_eq!(loaded.dropped_rows, 1);
    }

    #[test]
    fn caps_clamp_without_dropping() {
        let d = Dataset::new(
            array![[19.0, 30_000.0], [40.0, 5_000.0], [90.0, -3.0]],
            vec![0, 1, 0],
            schema2(),
        )
        .unwrap();
        let capped = apply_caps(&d);
        assert_eq!(capped.x, array![[21.0, 25_000.0], [40.0, 5_000.0], [85.0, 0.0]]);
        assert_eq!(apply_caps(&capped), capped);
    }

    #[test]
    fn allocation_matches_reference_split() {
        // 97,243 rows with 6,871 positives at 70 %.
        let alloc = stratified_allocation([97_243 - 6_871, 6_871], 0.7);
        assert_eq!(alloc, [63_260, 4_810]);
        assert_eq!(alloc[0] + alloc[1], 68_070);
        assert_eq!(97_243 - 68_070, 29_173);
        assert_eq!(6_871 - alloc[1], 2_061);
    }

    #[test]
    fn small_exact_split() {
        let schema = FeatureSchema::new(vec![FeatureSpec::continuous("v")], "t").unwrap();
        let x = Array2::from_shape_fn((10, 1), |(i, _)| i as f64);
        let y = vec![1, 0, 1, 0, 1, 0, 1, 0, 1, 0];
        let d = Dataset::new(x, y, schema).unwrap();
        let s = stratified_split(&d, 0.6, 9).unwrap();
        assert_eq!(s.train.n_rows(), 6);
        assert_eq!(s.train.n_positive(), 3);
        assert_eq!(s.test.n_rows(), 4);
        let again = stratified_split(&d, 0.6, 9).unwrap();
        assert_eq!(s.train_indices, again.train_indices);
    }

    #[test]
    fn split_requires_two_per_class() {
        let schema = FeatureSchema::new(vec![FeatureSpec::continuous("v")], "t").unwrap();
        let d = Dataset::new(Array2::zeros((4, 1)), vec![0, 0, 0, 1], schema).unwrap();
        assert!(matches!(
            stratified_split(&d, 0.5, 1),
            Err(Error::Stratification(_))
        ));
        assert!(matches!(
            stratified_split(&d, 1.0, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn scaler_basics() {
        let schema = FeatureSchema::new(vec![FeatureSpec::continuous("v")], "t").unwrap();
        let d = Dataset::new(array![[1.0], [2.0], [3.0]], vec![0, 1, 0], schema.clone()).unwrap();
        let s = fit_scaler(&d).unwrap();
        assert_eq!(s.means, vec![2.0]);
        let probe = Dataset::new(
            array![[2.0], [2.0 + s.std_devs[0]]],
            vec![0, 0],
            schema.clone(),
        )
        .unwrap();
        let z = s.transform(&probe).unwrap();
        assert!(z.x[[0, 0]].abs() < 1e-15);
        assert!((z.x[[1, 0]] - 1.0).abs() < 1e-12);

        let constant = Dataset::new(array![[0.1], [0.1], [0.1]], vec![0, 1, 0], schema).unwrap();
        assert!(matches!(
            fit_scaler(&constant),
            Err(Error::DegenerateScale { .. })
        ));
    }

    #[test]
    fn scaler_arity_mismatch() {
        let s = ScalerParams {
            means: vec![0.0],
            std_devs: vec![1.0],
        };
        let d = Dataset::new(Array2::zeros((2, 2)), vec![0, 1], schema2()).unwrap();
        assert!(matches!(s.transform(&d), Err(Error::Schema(_))));
    }
}
