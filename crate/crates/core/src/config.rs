//! JSON run configuration.
//!
//! ```json
//! {
//!   "data_path": "cs-training.csv",
//!   "schema": { "target": "SeriousDlqin2yrs", "features": [ ... ] },
//!   "split": { "train_fraction": 0.7, "seed": 42 },
//!   "seed": 42,
//!   "output_dir": "out",
//!   "bootstrap": { "n_iter": 1000, "alpha": 0.05 },
//!   "suite": [ { "id": "E01", "technique": "none" }, ... ]
//! }
//! ```
//!
//! Unknown keys are rejected. Relative paths resolve against the directory
//! holding the configuration file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureSchema, FeatureSpec};
use crate::error::{Error, Result};
use crate::gbdt::GbdtConfig;
use crate::harness::{default_suite, validate_suite, BootstrapSettings, ExperimentSpec, OversampleParams, SuiteOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_fraction: default_train_fraction(),
            seed: default_seed(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapConfig {
    #[serde(default = "default_n_iter")]
    pub n_iter: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub stratified: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            n_iter: default_n_iter(),
            alpha: default_alpha(),
            stratified: false,
        }
    }
}

fn default_train_fraction() -> f64 {
    0.7
}
fn default_seed() -> u64 {
    42
}
fn default_n_iter() -> usize {
    crate::bootstrap::DEFAULT_ITERATIONS
}
fn default_alpha() -> f64 {
    crate::bootstrap::DEFAULT_ALPHA
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_js_bins() -> usize {
    crate::quality::DEFAULT_JS_BINS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data_path: PathBuf,
    pub schema: FeatureSchema,
    #[serde(default)]
    pub split: SplitConfig,
    /// Suite seed; per-scenario seeds derive from it and the scenario id.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    #[serde(default)]
    pub classifier: GbdtConfig,
    #[serde(default)]
    pub oversample: OversampleParams,
    #[serde(default = "default_js_bins")]
    pub js_bins: usize,
    pub suite: Vec<ExperimentSpec>,
}

/// Column layout of the public "Give Me Some Credit" training file. Caps
/// beyond age and income are clamping-only defaults.
pub fn credit_schema() -> FeatureSchema {
    FeatureSchema::new(
        vec![
            FeatureSpec::continuous("age").with_caps(Some(21.0), Some(85.0)),
            FeatureSpec::continuous("MonthlyIncome").with_caps(Some(0.0), Some(25_000.0)),
            FeatureSpec::continuous("DebtRatio").with_caps(Some(0.0), Some(5.0)),
            FeatureSpec::discrete("NumberOfDependents").with_caps(Some(0.0), Some(10.0)),
            FeatureSpec::discrete("NumberOfOpenCreditLinesAndLoans").with_caps(Some(0.0), Some(40.0)),
            FeatureSpec::discrete("NumberRealEstateLoansOrLines").with_caps(Some(0.0), Some(10.0)),
        ],
        "SeriousDlqin2yrs",
    )
    .expect("built-in schema is valid")
}

impl RunConfig {
    /// Ten-scenario credit configuration reading `data_path`.
    pub fn credit_default(data_path: impl Into<PathBuf>) -> Self {
        Self {
            data_path: data_path.into(),
            schema: credit_schema(),
            split: SplitConfig::default(),
            seed: default_seed(),
            output_dir: default_output_dir(),
            bootstrap: BootstrapConfig::default(),
            classifier: GbdtConfig::default(),
            oversample: OversampleParams::default(),
            js_bins: default_js_bins(),
            suite: default_suite(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse, validate and resolve relative paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        if cfg.data_path.is_relative() {
            cfg.data_path = base.join(&cfg.data_path);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        self.schema.validate().map_err(cfg_err)?;
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(Error::Config("split.train_fraction must lie in (0, 1)".into()));
        }
        if self.bootstrap.n_iter == 0 {
            return Err(Error::Config("bootstrap.n_iter must be positive".into()));
        }
        if !(self.bootstrap.alpha > 0.0 && self.bootstrap.alpha < 1.0) {
            return Err(Error::Config("bootstrap.alpha must lie in (0, 1)".into()));
        }
        if self.oversample.k_neighbors == 0 || self.oversample.m_neighbors == 0 {
            return Err(Error::Config("oversample neighbor counts must be positive".into()));
        }
        if self.js_bins == 0 {
            return Err(Error::Config("js_bins must be positive".into()));
        }
        self.classifier.validate().map_err(cfg_err)?;
        validate_suite(&self.suite)
    }

    pub fn suite_options(&self) -> SuiteOptions {
        SuiteOptions {
            train_fraction: self.split.train_fraction,
            split_seed: self.split.seed,
            global_seed: self.seed,
            bootstrap: BootstrapSettings {
                n_iter: self.bootstrap.n_iter,
                alpha: self.bootstrap.alpha,
                stratified: self.bootstrap.stratified,
            },
            classifier: self.classifier.clone(),
            oversample: self.oversample.clone(),
            js_bins: self.js_bins,
        }
    }

    pub fn spec(&self, id: &str) -> Result<&ExperimentSpec> {
        self.suite
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::Config(format!("no experiment with id `{id}` in the suite")))
    }
}
