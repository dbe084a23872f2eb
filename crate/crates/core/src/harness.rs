//! Declarative augmentation experiments.
//!
//! A suite is a list of [`ExperimentSpec`]s with exactly one baseline. All
//! scenarios share one stratified split and one scaler fitted on the
//! training partition; synthetic rows are generated from the training
//! partition only and every model is scored on the same untouched test rows.
//! Each non-baseline scenario is then compared with the baseline by a paired
//! bootstrap on those test scores.

use std::collections::HashSet;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_compare, significance_flag, BootstrapOptions, BootstrapResult};
use crate::dataset::{fit_scaler, stratified_split, Dataset, ScalerParams, SplitResult};
use crate::error::{Error, Result};
use crate::gbdt::{self, GbdtConfig, GbdtModel};
use crate::metrics::{discrimination, ScoredSet};
use crate::oversample::{
    ensemble_combine, finalize_batch, oversample, FinalizedBatch, OversampleConfig, SyntheticBatch,
    Technique, DEFAULT_K_NEIGHBORS, DEFAULT_M_NEIGHBORS,
};
use crate::quality::{quality_report, FeatureQualityRow, DEFAULT_JS_BINS};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Augmentation {
    None,
    Smote,
    BorderlineSmote,
    Adasyn,
    /// One batch from each technique at the same multiplier, concatenated.
    Ensemble,
}

impl Augmentation {
    pub fn techniques(self) -> Vec<Technique> {
        match self {
            Augmentation::None => vec![],
            Augmentation::Smote => vec![Technique::Smote],
            Augmentation::BorderlineSmote => vec![Technique::BorderlineSmote],
            Augmentation::Adasyn => vec![Technique::Adasyn],
            Augmentation::Ensemble => Technique::ALL.to_vec(),
        }
    }
}

impl From<Technique> for Augmentation {
    fn from(t: Technique) -> Self {
        match t {
            Technique::Smote => Augmentation::Smote,
            Technique::BorderlineSmote => Augmentation::BorderlineSmote,
            Technique::Adasyn => Augmentation::Adasyn,
        }
    }
}

impl fmt::Display for Augmentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Augmentation::None => f.write_str("Baseline"),
            Augmentation::Ensemble => f.write_str("Ensemble"),
            other => write!(f, "{}", other.techniques()[0]),
        }
    }
}

fn default_k() -> usize {
    DEFAULT_K_NEIGHBORS
}

fn default_m() -> usize {
    DEFAULT_M_NEIGHBORS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OversampleParams {
    #[serde(default = "default_k")]
    pub k_neighbors: usize,
    #[serde(default = "default_m")]
    pub m_neighbors: usize,
}

impl Default for OversampleParams {
    fn default() -> Self {
        Self {
            k_neighbors: DEFAULT_K_NEIGHBORS,
            m_neighbors: DEFAULT_M_NEIGHBORS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub id: String,
    pub technique: Augmentation,
    /// Ignored for the baseline.
    #[serde(default)]
    pub multiplier: f64,
    /// Overrides the suite-wide neighbor settings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversample: Option<OversampleParams>,
    /// Overrides the suite-wide classifier settings. `scale_pos_weight` is
    /// always recomputed from the augmented training set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classifier: Option<GbdtConfig>,
    /// Fixed scenario seed; derived from the suite seed and `id` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentSpec {
    pub fn baseline(id: &str) -> Self {
        Self {
            id: id.to_string(),
            technique: Augmentation::None,
            multiplier: 0.0,
            oversample: None,
            classifier: None,
            seed: None,
        }
    }

    pub fn augmented(id: &str, technique: Augmentation, multiplier: f64) -> Self {
        Self {
            technique,
            multiplier,
            ..Self::baseline(id)
        }
    }

    pub fn is_baseline(&self) -> bool {
        self.technique == Augmentation::None
    }

    /// Human-readable scenario name, e.g. `ADASYN 1×`.
    pub fn label(&self) -> String {
        match self.technique {
            Augmentation::None => "Baseline".to_string(),
            t => format!("{t} {}×", self.multiplier),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::Config("experiment id must not be empty".into()));
        }
        if !self.is_baseline() && !(self.multiplier > 0.0 && self.multiplier.is_finite()) {
            return Err(Error::Config(format!(
                "experiment {}: multiplier must be positive",
                self.id
            )));
        }
        if let Some(p) = &self.oversample {
            if p.k_neighbors == 0 || p.m_neighbors == 0 {
                return Err(Error::Config(format!(
                    "experiment {}: neighbor counts must be positive",
                    self.id
                )));
            }
        }
        if let Some(c) = &self.classifier {
            c.validate().map_err(|e| Error::Config(format!("experiment {}: {e}", self.id)))?;
        }
        Ok(())
    }
}

/// The ten scenarios E01–E10.
pub fn default_suite() -> Vec<ExperimentSpec> {
    use Augmentation::*;
    vec![
        ExperimentSpec::baseline("E01"),
        ExperimentSpec::augmented("E02", Smote, 1.0),
        ExperimentSpec::augmented("E03", Smote, 2.0),
        ExperimentSpec::augmented("E04", Smote, 3.0),
        ExperimentSpec::augmented("E05", BorderlineSmote, 2.0),
        ExperimentSpec::augmented("E06", Adasyn, 2.0),
        ExperimentSpec::augmented("E07", Ensemble, 1.0),
        ExperimentSpec::augmented("E08", Adasyn, 1.0),
        ExperimentSpec::augmented("E09", Adasyn, 3.0),
        ExperimentSpec::augmented("E10", BorderlineSmote, 1.0),
    ]
}

/// Check that ids are unique and exactly one baseline is present.
pub fn validate_suite(specs: &[ExperimentSpec]) -> Result<()> {
    let baselines = specs.iter().filter(|s| s.is_baseline()).count();
    if baselines != 1 {
        return Err(Error::Config(format!(
            "suite must contain exactly one baseline (technique \"none\"), found {baselines}"
        )));
    }
    let mut ids = HashSet::new();
    for s in specs {
        s.validate()?;
        if !ids.insert(s.id.as_str()) {
            return Err(Error::Config(format!("duplicate experiment id `{}`", s.id)));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub n_iter: usize,
    pub alpha: f64,
    pub stratified: bool,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        Self {
            n_iter: crate::bootstrap::DEFAULT_ITERATIONS,
            alpha: crate::bootstrap::DEFAULT_ALPHA,
            stratified: false,
        }
    }
}

/// Suite-wide settings shared by every scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub train_fraction: f64,
    pub split_seed: u64,
    pub global_seed: u64,
    pub bootstrap: BootstrapSettings,
    pub classifier: GbdtConfig,
    pub oversample: OversampleParams,
    pub js_bins: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            split_seed: 42,
            global_seed: 42,
            bootstrap: BootstrapSettings::default(),
            classifier: GbdtConfig::default(),
            oversample: OversampleParams::default(),
            js_bins: DEFAULT_JS_BINS,
        }
    }
}

/// Split, scaler and standardized partitions shared across scenarios.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub split: SplitResult,
    pub scaler: ScalerParams,
    pub train_std: Dataset,
    pub test_std: Dataset,
}

impl Prepared {
    /// `data` should already be capped.
    pub fn new(data: &Dataset, train_fraction: f64, split_seed: u64) -> Result<Self> {
        let split = stratified_split(data, train_fraction, split_seed)?;
        Self::from_split(split)
    }

    pub fn from_split(split: SplitResult) -> Result<Self> {
        let scaler = fit_scaler(&split.train)?;
        let train_std = scaler.transform(&split.train)?;
        let test_std = scaler.transform(&split.test)?;
        Ok(Self {
            split,
            scaler,
            train_std,
            test_std,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub id: String,
    pub label: String,
    pub technique: Augmentation,
    pub multiplier: f64,
    pub seed: u64,
    pub n_train: usize,
    pub n_synthetic: usize,
    pub n_majority: usize,
    pub n_minority: usize,
    /// Minority share of the augmented training set.
    pub minority_fraction: f64,
    /// `n_majority / n_minority` after augmentation.
    pub final_ratio: f64,
    pub scale_pos_weight: f64,
    pub auc: f64,
    pub gini: f64,
    pub ks: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap_vs_baseline: Option<BootstrapResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quality: Option<Vec<FeatureQualityRow>>,
    /// Excluded from serialized reports so they stay byte-reproducible.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

/// Everything one scenario produced.
#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub result: ExperimentResult,
    pub test_scores: Vec<f64>,
    pub model: GbdtModel,
    pub synthetic: Option<(SyntheticBatch, FinalizedBatch)>,
}

/// Seed used by a spec inside a suite seeded with `global_seed`.
pub fn scenario_seed(spec: &ExperimentSpec, global_seed: u64) -> u64 {
    spec.seed.unwrap_or_else(|| rng::seed_for_label(global_seed, &spec.id))
}

/// Generate the spec's synthetic rows from the standardized training set.
pub fn generate_synthetic(
    spec: &ExperimentSpec,
    prepared: &Prepared,
    defaults: &OversampleParams,
    seed: u64,
) -> Result<Option<(SyntheticBatch, FinalizedBatch)>> {
    let techniques = spec.technique.techniques();
    if techniques.is_empty() {
        return Ok(None);
    }
    let params = spec.oversample.as_ref().unwrap_or(defaults);
    let minority = prepared.train_std.class_matrix(1);
    let majority = prepared.train_std.class_matrix(0);
    let batches = techniques
        .iter()
        .map(|&t| {
            let technique_seed = if techniques.len() == 1 {
                seed
            } else {
                rng::seed_for_label(seed, t.key())
            };
            let cfg = OversampleConfig {
                technique: t,
                multiplier: spec.multiplier,
                k_neighbors: params.k_neighbors,
                m_neighbors: params.m_neighbors,
                seed: technique_seed,
            };
            oversample(minority.view(), majority.view(), &cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let batch = ensemble_combine(&batches)?;
    let finalized = finalize_batch(&batch, &prepared.scaler, &prepared.train_std.schema)?;
    Ok(Some((batch, finalized)))
}

/// Augment (training rows only), train with a recomputed `scale_pos_weight`,
/// and score the untouched test partition.
pub fn run_experiment(spec: &ExperimentSpec, prepared: &Prepared, opts: &SuiteOptions) -> Result<ScenarioRun> {
    let started = Instant::now();
    let seed = scenario_seed(spec, opts.global_seed);
    let synthetic = generate_synthetic(spec, prepared, &opts.oversample, seed)?;

    let train_set = match &synthetic {
        Some((_, fin)) => prepared.train_std.concat(&fin.standardized)?,
        None => prepared.train_std.clone(),
    };
    let scale_pos_weight = gbdt::compute_scale_pos_weight(&train_set)?;
    let cfg = GbdtConfig {
        scale_pos_weight,
        seed,
        ..spec.classifier.clone().unwrap_or_else(|| opts.classifier.clone())
    };
    let model = gbdt::train_dataset(&train_set, &cfg)?;
    let test_scores = model.predict_proba(prepared.test_std.x.view())?;
    let disc = discrimination(&ScoredSet::new(test_scores.clone(), prepared.test_std.y.clone())?)?;

    let quality = match &synthetic {
        Some((_, fin)) if !fin.original.x.is_empty() => {
            let real = prepared.split.train.select(
                &(0..prepared.split.train.n_rows())
                    .filter(|&i| prepared.split.train.y[i] == 1)
                    .collect::<Vec<_>>(),
            );
            Some(quality_report(&real, &fin.original, opts.js_bins)?)
        }
        _ => None,
    };

    let n_minority = train_set.n_positive();
    let n_majority = train_set.n_negative();
    let result = ExperimentResult {
        id: spec.id.clone(),
        label: spec.label(),
        technique: spec.technique,
        multiplier: if spec.is_baseline() { 0.0 } else { spec.multiplier },
        seed,
        n_train: train_set.n_rows(),
        n_synthetic: synthetic.as_ref().map_or(0, |(b, _)| b.len()),
        n_majority,
        n_minority,
        minority_fraction: n_minority as f64 / train_set.n_rows() as f64,
        final_ratio: n_majority as f64 / n_minority as f64,
        scale_pos_weight,
        auc: disc.auc,
        gini: disc.gini,
        ks: disc.ks,
        bootstrap_vs_baseline: None,
        quality,
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    Ok(ScenarioRun {
        result,
        test_scores,
        model,
        synthetic,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFailure {
    pub id: String,
    pub error: String,
}

/// Output of [`run_suite`]. `runs` keeps scores and models for export.
#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub options: SuiteOptions,
    pub prepared: Prepared,
    pub results: Vec<ExperimentResult>,
    pub failures: Vec<ScenarioFailure>,
    pub runs: Vec<ScenarioRun>,
    pub test_digest_before: String,
    pub test_digest_after: String,
}

impl SuiteOutcome {
    pub fn baseline(&self) -> Option<&ExperimentResult> {
        self.results.iter().find(|r| r.technique == Augmentation::None)
    }

    pub fn result(&self, id: &str) -> Option<&ExperimentResult> {
        self.results.iter().find(|r| r.id == id)
    }
}

/// Run every spec against one shared split of `data` (already capped).
pub fn run_suite(specs: &[ExperimentSpec], data: &Dataset, opts: &SuiteOptions) -> Result<SuiteOutcome> {
    validate_suite(specs)?;
    let prepared = Prepared::new(data, opts.train_fraction, opts.split_seed)?;
    run_suite_prepared(specs, prepared, opts)
}

pub fn run_suite_prepared(specs: &[ExperimentSpec], prepared: Prepared, opts: &SuiteOptions) -> Result<SuiteOutcome> {
    validate_suite(specs)?;
    let test_digest_before = prepared.split.test.digest();

    let outcomes: Vec<Result<ScenarioRun>> = specs
        .par_iter()
        .map(|spec| run_experiment(spec, &prepared, opts))
        .collect();

    let baseline_pos = specs.iter().position(|s| s.is_baseline()).expect("validated");
    let baseline_scores = match &outcomes[baseline_pos] {
        Ok(run) => run.test_scores.clone(),
        Err(e) => {
            return Err(Error::Config(format!(
                "baseline scenario {} failed: {e}",
                specs[baseline_pos].id
            )))
        }
    };

    let boot_opts = BootstrapOptions {
        n_iterations: opts.bootstrap.n_iter,
        seed: rng::seed_for_label(opts.global_seed, "bootstrap"),
        stratified: opts.bootstrap.stratified,
    };
    let labels = &prepared.test_std.y;
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (spec, outcome) in specs.iter().zip(outcomes) {
        match outcome {
            Ok(mut run) => {
                if !spec.is_baseline() {
                    run.result.bootstrap_vs_baseline =
                        Some(bootstrap_compare(&run.test_scores, &baseline_scores, labels, &boot_opts)?);
                }
                runs.push(run);
            }
            Err(e) => {
                log::warn!("scenario {} failed: {e}", spec.id);
                failures.push(ScenarioFailure {
                    id: spec.id.clone(),
                    error: e.to_string(),
                });
            }
        }
    }

    let test_digest_after = prepared.split.test.digest();
    Ok(SuiteOutcome {
        options: opts.clone(),
        results: runs.iter().map(|r| r.result.clone()).collect(),
        runs,
        failures,
        prepared,
        test_digest_before,
        test_digest_after,
    })
}

/// One row of the ranking table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedRow {
    pub rank: usize,
    pub id: String,
    pub label: String,
    pub n_train: usize,
    /// Minority share of the training set, in percent.
    pub target_pct: f64,
    pub auc: f64,
    pub gini: f64,
    pub ks: f64,
    pub delta_auc: f64,
    pub p_value: Option<f64>,
    pub significant: bool,
}

/// Order by descending AUC; ties go to the smaller training set, then id.
pub fn rank_results(results: &[ExperimentResult], alpha: f64) -> Vec<RankedRow> {
    let baseline_auc = results
        .iter()
        .find(|r| r.technique == Augmentation::None)
        .map(|r| r.auc);
    let mut sorted: Vec<&ExperimentResult> = results.iter().collect();
    sorted.sort_by(|a, b| {
        b.auc
            .total_cmp(&a.auc)
            .then(a.n_train.cmp(&b.n_train))
            .then(a.id.cmp(&b.id))
    });
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let delta_auc = match (&r.bootstrap_vs_baseline, baseline_auc) {
                _ if r.technique == Augmentation::None => 0.0,
                (Some(b), _) => b.delta_auc_point,
                (None, Some(base)) => r.auc - base,
                (None, None) => 0.0,
            };
            RankedRow {
                rank: i + 1,
                id: r.id.clone(),
                label: r.label.clone(),
                n_train: r.n_train,
                target_pct: 100.0 * r.minority_fraction,
                auc: r.auc,
                gini: r.gini,
                ks: r.ks,
                delta_auc,
                p_value: r.bootstrap_vs_baseline.as_ref().map(|b| b.p_value),
                significant: r
                    .bootstrap_vs_baseline
                    .as_ref()
                    .is_some_and(|b| significance_flag(b, alpha)),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub multiplier: f64,
    pub result: ExperimentResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub technique: Technique,
    pub baseline: ExperimentResult,
    /// Ordered by multiplier.
    pub points: Vec<SweepPoint>,
    /// Multiplier with the highest AUC (smallest multiplier on ties).
    pub argmax_multiplier: f64,
    pub failures: Vec<ScenarioFailure>,
}

pub fn sweep_id(technique: Technique, multiplier: f64) -> String {
    format!("{}-{multiplier}x", technique.key())
}

/// Baseline plus one scenario per multiplier for a single technique.
pub fn sweep(technique: Technique, multipliers: &[f64], data: &Dataset, opts: &SuiteOptions) -> Result<SweepReport> {
    let prepared = Prepared::new(data, opts.train_fraction, opts.split_seed)?;
    sweep_prepared(technique, multipliers, prepared, opts)
}

pub fn sweep_prepared(
    technique: Technique,
    multipliers: &[f64],
    prepared: Prepared,
    opts: &SuiteOptions,
) -> Result<SweepReport> {
    if multipliers.is_empty() {
        return Err(Error::Config("sweep needs at least one multiplier".into()));
    }
    let mut ms = multipliers.to_vec();
    ms.sort_by(f64::total_cmp);
    ms.dedup();
    let mut specs = vec![ExperimentSpec::baseline("baseline")];
    specs.extend(
        ms.iter()
            .map(|&m| ExperimentSpec::augmented(&sweep_id(technique, m), technique.into(), m)),
    );
    let outcome = run_suite_prepared(&specs, prepared, opts)?;
    let baseline = outcome.baseline().expect("baseline succeeded").clone();
    let points: Vec<SweepPoint> = ms
        .iter()
        .filter_map(|&m| {
            outcome.result(&sweep_id(technique, m)).map(|r| SweepPoint {
                multiplier: m,
                result: r.clone(),
            })
        })
        .collect();
    let argmax_multiplier = points
        .iter()
        .fold(None::<&SweepPoint>, |best, p| match best {
            Some(b) if b.result.auc >= p.result.auc => Some(b),
            _ => Some(p),
        })
        .map_or(f64::NAN, |p| p.multiplier);
    Ok(SweepReport {
        technique,
        baseline,
        points,
        argmax_multiplier,
        failures: outcome.failures,
    })
}
