//! Synthetic minority oversampling: SMOTE, BorderlineSMOTE (borderline-1)
//! and ADASYN.
//!
//! All three generators work on standardized feature matrices and share the
//! same interpolation step: a synthetic row is `x_i + λ (x_j − x_i)` where
//! `x_j` is one of the `k` nearest minority neighbors of the base instance
//! `x_i` and `λ ~ U[0, 1)` is drawn once per row. They differ only in how
//! base instances are chosen:
//!
//! * SMOTE cycles through a seeded permutation of every minority row.
//! * BorderlineSMOTE cycles through the "danger" rows only, i.e. those with
//!   `m/2 <= m' < m` majority rows among their `m` nearest neighbors in the
//!   full training set.
//! * ADASYN gives row `i` a quota `g_i` proportional to its share of majority
//!   neighbors, rounded by largest remainder so the quotas sum to `G`.
//!
//! The output always contains exactly `G = round(multiplier * n_minority)`
//! rows. Row `t` draws its randomness from a stream keyed by `(seed, t)`, so
//! generation is reproducible regardless of thread count.

use std::fmt;
use std::path::Path;

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureKind, FeatureSchema, ScalerParams};
use crate::error::{Error, Result};
use crate::neighbors::{knn, NeighborTable};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technique {
    Smote,
    BorderlineSmote,
    Adasyn,
}

impl Technique {
    pub const ALL: [Technique; 3] = [Technique::Smote, Technique::BorderlineSmote, Technique::Adasyn];

    /// Machine-friendly name used in configs and CSV columns.
    pub fn key(self) -> &'static str {
        match self {
            Technique::Smote => "smote",
            Technique::BorderlineSmote => "borderline_smote",
            Technique::Adasyn => "adasyn",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "smote" => Some(Technique::Smote),
            "borderline_smote" | "borderlinesmote" | "borderline" => Some(Technique::BorderlineSmote),
            "adasyn" => Some(Technique::Adasyn),
            _ => None,
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Technique::Smote => "SMOTE",
            Technique::BorderlineSmote => "BorderlineSMOTE",
            Technique::Adasyn => "ADASYN",
        })
    }
}

pub const DEFAULT_K_NEIGHBORS: usize = 5;
pub const DEFAULT_M_NEIGHBORS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OversampleConfig {
    pub technique: Technique,
    /// `G = round(multiplier * n_minority)` synthetic rows are produced.
    pub multiplier: f64,
    pub k_neighbors: usize,
    /// Neighborhood size for the BorderlineSMOTE danger test.
    pub m_neighbors: usize,
    pub seed: u64,
}

impl OversampleConfig {
    pub fn new(technique: Technique, multiplier: f64, seed: u64) -> Self {
        Self {
            technique,
            multiplier,
            k_neighbors: DEFAULT_K_NEIGHBORS,
            m_neighbors: DEFAULT_M_NEIGHBORS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.multiplier > 0.0 && self.multiplier.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "multiplier must be positive, got {}",
                self.multiplier
            )));
        }
        if self.k_neighbors == 0 || self.m_neighbors == 0 {
            return Err(Error::InvalidArgument(
                "k_neighbors and m_neighbors must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of synthetic rows requested for `n_minority` real rows.
    pub fn target_count(&self, n_minority: usize) -> usize {
        (self.multiplier * n_minority as f64).round() as usize
    }
}

/// Where one synthetic row came from. Parent indices refer to rows of the
/// minority matrix passed to the generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowProvenance {
    pub technique: Technique,
    pub parent_i: usize,
    pub parent_j: usize,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSource {
    pub technique: Technique,
    pub multiplier: f64,
    pub seed: u64,
    pub rows: usize,
}

/// Generated minority rows in standardized space. Every row has label 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticBatch {
    pub x: Array2<f64>,
    pub provenance: Vec<RowProvenance>,
    pub sources: Vec<BatchSource>,
}

impl SyntheticBatch {
    fn empty(n_features: usize, cfg: &OversampleConfig) -> Self {
        Self {
            x: Array2::zeros((0, n_features)),
            provenance: Vec::new(),
            sources: vec![BatchSource {
                technique: cfg.technique,
                multiplier: cfg.multiplier,
                seed: cfg.seed,
                rows: 0,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self) -> Vec<u8> {
        vec![1; self.len()]
    }
}

fn interpolate(
    minority: ArrayView2<'_, f64>,
    neighbors: &NeighborTable,
    bases: &[usize],
    cfg: &OversampleConfig,
) -> SyntheticBatch {
    let d = minority.ncols();
    let row_seed = rng::derive_seed(cfg.seed, 1);
    let rows: Vec<(Vec<f64>, RowProvenance)> = bases
        .par_iter()
        .enumerate()
        .map(|(t, &i)| {
            let mut r = rng::stream(row_seed, t as u64);
            let choices = &neighbors.indices[i];
            let j = choices[r.random_range(0..choices.len())];
            let lambda: f64 = r.random();
            let xi = minority.row(i);
            let xj = minority.row(j);
            let row = xi.iter().zip(xj.iter()).map(|(a, b)| a + lambda * (b - a)).collect();
            (
                row,
                RowProvenance {
                    technique: cfg.technique,
                    parent_i: i,
                    parent_j: j,
                    lambda,
                },
            )
        })
        .collect();
    let mut flat = Vec::with_capacity(rows.len() * d);
    let mut provenance = Vec::with_capacity(rows.len());
    for (row, p) in rows {
        flat.extend(row);
        provenance.push(p);
    }
    SyntheticBatch {
        x: Array2::from_shape_vec((provenance.len(), d), flat).expect("row width matches"),
        provenance,
        sources: vec![BatchSource {
            technique: cfg.technique,
            multiplier: cfg.multiplier,
            seed: cfg.seed,
            rows: bases.len(),
        }],
    }
}

/// Base instances `pool[perm[t % |pool|]]` for `t in 0..total`.
fn round_robin(pool: &[usize], total: usize, seed: u64) -> Vec<usize> {
    let mut order = pool.to_vec();
    order.shuffle(&mut rng::stream(seed, 0));
    (0..total).map(|t| order[t % order.len()]).collect()
}

fn minority_neighbors(minority: ArrayView2<'_, f64>, k: usize) -> Result<NeighborTable> {
    knn(minority, minority, k, true)
}

fn check_majority(minority: ArrayView2<'_, f64>, majority: ArrayView2<'_, f64>) -> Result<()> {
    if majority.nrows() == 0 {
        return Err(Error::DegenerateClass("majority set is empty".into()));
    }
    if majority.ncols() != minority.ncols() {
        return Err(Error::Schema(format!(
            "minority has {} features, majority {}",
            minority.ncols(),
            majority.ncols()
        )));
    }
    Ok(())
}

/// Count majority rows among each minority row's `m` nearest neighbors in
/// `[minority; majority]`, excluding the row itself.
fn majority_neighbor_counts(
    minority: ArrayView2<'_, f64>,
    majority: ArrayView2<'_, f64>,
    m: usize,
) -> Result<Vec<usize>> {
    let full = concatenate(Axis(0), &[minority, majority]).map_err(|e| Error::Schema(e.to_string()))?;
    let n_min = minority.nrows();
    let table = knn(minority, full.view(), m, true)?;
    Ok(table
        .indices
        .iter()
        .map(|row| row.iter().filter(|&&r| r >= n_min).count())
        .collect())
}

pub fn smote(minority: ArrayView2<'_, f64>, cfg: &OversampleConfig) -> Result<SyntheticBatch> {
    cfg.validate()?;
    let total = cfg.target_count(minority.nrows());
    if total == 0 {
        return Ok(SyntheticBatch::empty(minority.ncols(), cfg));
    }
    let neighbors = minority_neighbors(minority, cfg.k_neighbors)?;
    let pool: Vec<usize> = (0..minority.nrows()).collect();
    let bases = round_robin(&pool, total, cfg.seed);
    Ok(interpolate(minority, &neighbors, &bases, cfg))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborhoodClass {
    /// Fewer than half of the neighbors are majority rows.
    Safe,
    /// `m/2 <= m' < m`: eligible as a BorderlineSMOTE base instance.
    Danger,
    /// Every neighbor is a majority row.
    Noise,
}

impl NeighborhoodClass {
    pub fn from_count(majority_neighbors: usize, m: usize) -> Self {
        if majority_neighbors >= m {
            NeighborhoodClass::Noise
        } else if 2 * majority_neighbors >= m {
            NeighborhoodClass::Danger
        } else {
            NeighborhoodClass::Safe
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BorderlineAssessment {
    pub majority_counts: Vec<usize>,
    pub classes: Vec<NeighborhoodClass>,
}

impl BorderlineAssessment {
    pub fn danger_indices(&self) -> Vec<usize> {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == NeighborhoodClass::Danger)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Run the danger test for every minority row with neighborhood size `m`.
pub fn classify_borderline(
    minority: ArrayView2<'_, f64>,
    majority: ArrayView2<'_, f64>,
    m: usize,
) -> Result<BorderlineAssessment> {
    check_majority(minority, majority)?;
    let majority_counts = majority_neighbor_counts(minority, majority, m)?;
    let classes = majority_counts
        .iter()
        .map(|&c| NeighborhoodClass::from_count(c, m))
        .collect();
    Ok(BorderlineAssessment {
        majority_counts,
        classes,
    })
}

pub fn borderline_smote(
    minority: ArrayView2<'_, f64>,
    majority: ArrayView2<'_, f64>,
    cfg: &OversampleConfig,
) -> Result<SyntheticBatch> {
    cfg.validate()?;
    check_majority(minority, majority)?;
    let total = cfg.target_count(minority.nrows());
    if total == 0 {
        return Ok(SyntheticBatch::empty(minority.ncols(), cfg));
    }
    let neighbors = minority_neighbors(minority, cfg.k_neighbors)?;
    let assessment = classify_borderline(minority, majority, cfg.m_neighbors)?;
    let danger = assessment.danger_indices();
    if danger.is_empty() {
        return Err(Error::NoBorderline);
    }
    let bases = round_robin(&danger, total, cfg.seed);
    Ok(interpolate(minority, &neighbors, &bases, cfg))
}

/// Per-instance ADASYN quotas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdasynAllocation {
    /// Δ_i: majority rows among the k nearest neighbors in the full set.
    pub majority_counts: Vec<usize>,
    /// r_i = Δ_i / k.
    pub ratios: Vec<f64>,
    /// r_i / Σ r (uniform when every r_i is zero).
    pub normalized: Vec<f64>,
    /// g_i, summing to the requested total.
    pub counts: Vec<usize>,
    /// True when Σ r = 0 and the allocation fell back to uniform.
    pub uniform_fallback: bool,
}

/// Hamilton (largest remainder) apportionment of `total` proportional to
/// integer `weights`, computed exactly. Remainder ties go to the lower index.
pub fn largest_remainder(weights: &[u64], total: usize) -> Vec<usize> {
    let sum: u128 = weights.iter().map(|&w| w as u128).sum();
    if weights.is_empty() {
        return Vec::new();
    }
    assert!(sum > 0, "weights must not all be zero");
    let total128 = total as u128;
    let mut counts = Vec::with_capacity(weights.len());
    let mut remainders = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        let scaled = w as u128 * total128;
        counts.push((scaled / sum) as usize);
        remainders.push((scaled % sum, i));
    }
    let assigned: usize = counts.iter().sum();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take(total - assigned) {
        counts[i] += 1;
    }
    counts
}

pub fn adasyn_allocation(
    minority: ArrayView2<'_, f64>,
    majority: ArrayView2<'_, f64>,
    k: usize,
    total: usize,
) -> Result<AdasynAllocation> {
    check_majority(minority, majority)?;
    let majority_counts = majority_neighbor_counts(minority, majority, k)?;
    let ratios: Vec<f64> = majority_counts.iter().map(|&d| d as f64 / k as f64).collect();
    let delta_sum: usize = majority_counts.iter().sum();
    let uniform_fallback = delta_sum == 0;
    let weights: Vec<u64> = if uniform_fallback {
        log::warn!("ADASYN: no minority row has majority neighbors; allocating uniformly");
        vec![1; majority_counts.len()]
    } else {
        majority_counts.iter().map(|&d| d as u64).collect()
    };
    let weight_sum: u64 = weights.iter().sum();
    let normalized = weights.iter().map(|&w| w as f64 / weight_sum as f64).collect();
    let counts = largest_remainder(&weights, total);
    Ok(AdasynAllocation {
        majority_counts,
        ratios,
        normalized,
        counts,
        uniform_fallback,
    })
}

pub fn adasyn(
    minority: ArrayView2<'_, f64>,
    majority: ArrayView2<'_, f64>,
    cfg: &OversampleConfig,
) -> Result<(SyntheticBatch, AdasynAllocation)> {
    cfg.validate()?;
    let total = cfg.target_count(minority.nrows());
    let neighbors = minority_neighbors(minority, cfg.k_neighbors)?;
    let allocation = adasyn_allocation(minority, majority, cfg.k_neighbors, total)?;
    let bases: Vec<usize> = allocation
        .counts
        .iter()
        .enumerate()
        .flat_map(|(i, &g)| std::iter::repeat_n(i, g))
        .collect();
    if bases.is_empty() {
        return Ok((SyntheticBatch::empty(minority.ncols(), cfg), allocation));
    }
    Ok((interpolate(minority, &neighbors, &bases, cfg), allocation))
}

/// Dispatch on `cfg.technique`.
pub fn oversample(
    minority: ArrayView2<'_, f64>,
    majority: ArrayView2<'_, f64>,
    cfg: &OversampleConfig,
) -> Result<SyntheticBatch> {
    match cfg.technique {
        Technique::Smote => smote(minority, cfg),
        Technique::BorderlineSmote => borderline_smote(minority, majority, cfg),
        Technique::Adasyn => adasyn(minority, majority, cfg).map(|(b, _)| b),
    }
}

/// Concatenate batches, keeping every row's provenance. No deduplication.
pub fn ensemble_combine(batches: &[SyntheticBatch]) -> Result<SyntheticBatch> {
    let Some(first) = batches.first() else {
        return Err(Error::EmptyInput("ensemble needs at least one batch"));
    };
    let d = first.x.ncols();
    if let Some(bad) = batches.iter().find(|b| b.x.ncols() != d) {
        return Err(Error::Schema(format!(
            "batch arity {} differs from {d}",
            bad.x.ncols()
        )));
    }
    let views: Vec<_> = batches.iter().map(|b| b.x.view()).collect();
    let x = concatenate(Axis(0), &views).map_err(|e| Error::Schema(e.to_string()))?;
    Ok(SyntheticBatch {
        x,
        provenance: batches.iter().flat_map(|b| b.provenance.iter().cloned()).collect(),
        sources: batches.iter().flat_map(|b| b.sources.iter().cloned()).collect(),
    })
}

/// Synthetic rows in original units (rounded, clamped) and re-standardized.
#[derive(Clone, Debug, PartialEq)]
pub struct FinalizedBatch {
    pub original: Dataset,
    pub standardized: Dataset,
}

/// Map a standardized batch back to original units, round discrete features
/// to the nearest integer, clamp into the schema caps, then standardize again.
pub fn finalize_batch(
    batch: &SyntheticBatch,
    scaler: &ScalerParams,
    schema: &FeatureSchema,
) -> Result<FinalizedBatch> {
    if batch.x.ncols() != schema.n_features() {
        return Err(Error::Schema(format!(
            "batch has {} features, schema declares {}",
            batch.x.ncols(),
            schema.n_features()
        )));
    }
    let mut original = scaler.inverse_transform_matrix(&batch.x)?;
    for (mut col, spec) in original.columns_mut().into_iter().zip(&schema.features) {
        let discrete = spec.kind == FeatureKind::DiscreteInteger;
        col.mapv_inplace(|v| spec.clamp(if discrete { v.round() } else { v }));
    }
    let standardized = scaler.transform_matrix(&original)?;
    Ok(FinalizedBatch {
        original: Dataset::new(original, batch.labels(), schema.clone())?,
        standardized: Dataset::new(standardized, batch.labels(), schema.clone())?,
    })
}

/// Export synthetic rows (original units) with provenance columns.
pub fn write_synthetic_csv(path: &Path, batch: &SyntheticBatch, finalized: &FinalizedBatch) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = finalized.original.schema.names().map(str::to_string).collect();
    header.extend(["technique", "parent_i", "parent_j", "lambda"].map(String::from));
    w.write_record(&header)?;
    for (row, p) in finalized.original.x.rows().into_iter().zip(&batch.provenance) {
        let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        record.push(p.technique.key().to_string());
        record.push(p.parent_i.to_string());
        record.push(p.parent_j.to_string());
        record.push(p.lambda.to_string());
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
