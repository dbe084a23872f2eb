//! Command-line front end. Every subcommand reads one JSON run configuration;
//! flags override its scalars.
//!
//! Exit codes: 0 on success, 1 when one or more scenarios failed, 2 on a
//! configuration or data error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bootstrap::{bootstrap_compare, BootstrapOptions, BootstrapResult};
use crate::config::RunConfig;
use crate::dataset::{apply_caps, load_csv};
use crate::error::{Error, Result};
use crate::gbdt::GbdtModel;
use crate::harness::{
    generate_synthetic, run_experiment, run_suite_prepared, scenario_seed, sweep_prepared, ExperimentSpec, Prepared,
};
use crate::metrics::{curve_points, discrimination, CurveKind, ScoredSet};
use crate::oversample::{write_synthetic_csv, Technique};
use crate::quality::{quality_report, write_quality_csv, FeatureQualityRow};
use crate::report::{format_ranking, write_suite_report, write_sweep_report};
use crate::rng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCENARIO_FAILURE: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "synthaug", version, about = "Oversampling experiments for imbalanced credit data")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Run configuration (JSON).
    #[arg(long, global = true, default_value = "synthaug.json")]
    pub config: PathBuf,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true, env = "SYNTHAUG_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
    /// Suite seed; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads. Results do not depend on this value.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, cap, split and standardize; write the partitions and scaler.
    Prepare,
    /// Generate one scenario's synthetic rows and their quality report.
    Augment(OnlyArg),
    /// Train one scenario's classifier and save it.
    Train(OnlyArg),
    /// Score a saved model on the test partition.
    Evaluate(OnlyArg),
    /// Run the suite (or the baseline plus one scenario) and write the report.
    Run(OptionalOnly),
    /// Baseline plus one scenario per multiplier for a single technique.
    Sweep(SweepArgs),
    /// Print and save the synthetic-vs-real quality table for one scenario.
    Quality(OnlyArg),
}

#[derive(Debug, Args)]
pub struct OnlyArg {
    /// Experiment id from the suite.
    #[arg(long)]
    pub only: String,
}

#[derive(Debug, Args)]
pub struct OptionalOnly {
    #[arg(long)]
    pub only: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// smote, borderline_smote or adasyn.
    #[arg(long, value_parser = parse_technique)]
    pub technique: Technique,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub multipliers: Vec<f64>,
}

fn parse_technique(s: &str) -> std::result::Result<Technique, String> {
    Technique::parse(s).ok_or_else(|| format!("unknown technique `{s}`"))
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Io { .. }
        | Error::Csv(_)
        | Error::Json(_)
        | Error::Schema(_)
        | Error::EmptyDataset
        | Error::Stratification(_)
        | Error::DegenerateScale { .. } => EXIT_CONFIG_ERROR,
        _ => EXIT_SCENARIO_FAILURE,
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let mut cfg = RunConfig::load(&cli.global.config)?;
    if let Some(dir) = &cli.global.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = cli.global.seed {
        cfg.seed = seed;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Prepare => cmd_prepare(&cfg),
        Command::Augment(a) => cmd_augment(&cfg, &a.only),
        Command::Train(a) => cmd_train(&cfg, &a.only),
        Command::Evaluate(a) => cmd_evaluate(&cfg, &a.only),
        Command::Run(a) => cmd_run(&cfg, a.only.as_deref()),
        Command::Sweep(a) => cmd_sweep(&cfg, a.technique, &a.multipliers),
        Command::Quality(a) => cmd_quality(&cfg, &a.only),
    })
}

fn output_dir(cfg: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    Ok(&cfg.output_dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Load the data file named in the configuration, cap it and split it.
pub fn load_prepared(cfg: &RunConfig) -> Result<(Prepared, usize)> {
    if !cfg.data_path.exists() {
        return Err(Error::Config(format!("data file {} does not exist", cfg.data_path.display())));
    }
    let loaded = load_csv(&cfg.data_path, &cfg.schema)?;
    if loaded.dropped_rows > 0 {
        log::info!("dropped {} rows with missing values", loaded.dropped_rows);
    }
    let data = apply_caps(&loaded.dataset);
    let prepared = Prepared::new(&data, cfg.split.train_fraction, cfg.split.seed)?;
    Ok((prepared, loaded.dropped_rows))
}

#[derive(Serialize)]
struct SplitSummary {
    data_path: String,
    dropped_rows: usize,
    train_fraction: f64,
    seed: u64,
    n_train: usize,
    n_test: usize,
    train_positives: usize,
    test_positives: usize,
    train_digest: String,
    test_digest: String,
}

fn cmd_prepare(cfg: &RunConfig) -> Result<i32> {
    let (prepared, dropped_rows) = load_prepared(cfg)?;
    let dir = output_dir(cfg)?;
    let split = &prepared.split;
    split.train.write_csv(&dir.join("train.csv"))?;
    split.test.write_csv(&dir.join("test.csv"))?;
    write_json(&dir.join("scaler.json"), &prepared.scaler)?;
    let summary = SplitSummary {
        data_path: cfg.data_path.display().to_string(),
        dropped_rows,
        train_fraction: split.train_fraction,
        seed: split.seed,
        n_train: split.train.n_rows(),
        n_test: split.test.n_rows(),
        train_positives: split.train.n_positive(),
        test_positives: split.test.n_positive(),
        train_digest: split.train.digest(),
        test_digest: split.test.digest(),
    };
    write_json(&dir.join("split.json"), &summary)?;
    println!(
        "train {} rows ({} positive), test {} rows ({} positive), {} dropped",
        summary.n_train, summary.train_positives, summary.n_test, summary.test_positives, dropped_rows
    );
    Ok(EXIT_OK)
}

fn minority_rows(prepared: &Prepared) -> crate::dataset::Dataset {
    let train = &prepared.split.train;
    let rows: Vec<usize> = (0..train.n_rows()).filter(|&i| train.y[i] == 1).collect();
    train.select(&rows)
}

fn synthetic_quality(
    cfg: &RunConfig,
    spec: &ExperimentSpec,
    prepared: &Prepared,
) -> Result<Option<Vec<FeatureQualityRow>>> {
    let seed = scenario_seed(spec, cfg.seed);
    let Some((batch, fin)) = generate_synthetic(spec, prepared, &cfg.oversample, seed)? else {
        return Ok(None);
    };
    let dir = output_dir(cfg)?;
    write_synthetic_csv(&dir.join(format!("synthetic_{}.csv", spec.id)), &batch, &fin)?;
    let rows = quality_report(&minority_rows(prepared), &fin.original, cfg.js_bins)?;
    write_quality_csv(&dir.join(format!("quality_{}.csv", spec.id)), &rows)?;
    Ok(Some(rows))
}

fn cmd_augment(cfg: &RunConfig, id: &str) -> Result<i32> {
    let spec = cfg.spec(id)?;
    let (prepared, _) = load_prepared(cfg)?;
    match synthetic_quality(cfg, spec, &prepared)? {
        None => println!("{id} is a baseline scenario; nothing to generate"),
        Some(rows) => println!("{id}: wrote synthetic_{id}.csv and quality_{id}.csv ({} features)", rows.len()),
    }
    Ok(EXIT_OK)
}

fn cmd_quality(cfg: &RunConfig, id: &str) -> Result<i32> {
    let spec = cfg.spec(id)?;
    let (prepared, _) = load_prepared(cfg)?;
    let Some(rows) = synthetic_quality(cfg, spec, &prepared)? else {
        println!("{id} is a baseline scenario; no synthetic rows");
        return Ok(EXIT_OK);
    };
    println!(
        "{:<34} {:>8} {:>10} {:>12} {:>10}  shifted",
        "feature", "KS", "KS p", "Wasserstein", "JS"
    );
    for r in &rows {
        println!(
            "{:<34} {:>8.4} {:>10.3e} {:>12.4} {:>10.4}  {}",
            r.feature, r.ks_stat, r.ks_p, r.wasserstein, r.js_divergence, r.shifted
        );
    }
    Ok(EXIT_OK)
}

fn cmd_train(cfg: &RunConfig, id: &str) -> Result<i32> {
    let spec = cfg.spec(id)?;
    let (prepared, _) = load_prepared(cfg)?;
    let run = run_experiment(spec, &prepared, &cfg.suite_options())?;
    let path = output_dir(cfg)?.join(format!("model_{id}.json"));
    run.model.save(&path)?;
    println!(
        "{id}: {} trees on {} rows (scale_pos_weight {:.4}) -> {}",
        run.model.trees.len(),
        run.result.n_train,
        run.result.scale_pos_weight,
        path.display()
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct EvaluationDocument {
    id: String,
    n_test: usize,
    auc: f64,
    gini: f64,
    ks: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    bootstrap_vs_baseline: Option<BootstrapResult>,
}

fn load_model(dir: &Path, id: &str) -> Result<GbdtModel> {
    let path = dir.join(format!("model_{id}.json"));
    if !path.exists() {
        return Err(Error::Config(format!(
            "model file {} not found; run `train --only {id}` first",
            path.display()
        )));
    }
    GbdtModel::load(&path)
}

fn cmd_evaluate(cfg: &RunConfig, id: &str) -> Result<i32> {
    let spec = cfg.spec(id)?;
    let (prepared, _) = load_prepared(cfg)?;
    let dir = output_dir(cfg)?;
    let model = load_model(dir, id)?;
    let test = &prepared.test_std;
    let scores = model.predict_proba(test.x.view())?;
    let scored = ScoredSet::new(scores.clone(), test.y.clone())?;
    let disc = discrimination(&scored)?;

    // Compare against a saved baseline model when one is available.
    let baseline = cfg.suite.iter().find(|s| s.is_baseline()).expect("validated");
    let bootstrap_vs_baseline = if spec.is_baseline() {
        None
    } else if dir.join(format!("model_{}.json", baseline.id)).exists() {
        let base_scores = load_model(dir, &baseline.id)?.predict_proba(test.x.view())?;
        let opts = BootstrapOptions {
            n_iterations: cfg.bootstrap.n_iter,
            seed: rng::seed_for_label(cfg.seed, "bootstrap"),
            stratified: cfg.bootstrap.stratified,
        };
        Some(bootstrap_compare(&scores, &base_scores, &test.y, &opts)?)
    } else {
        None
    };

    for (kind, name) in [(CurveKind::Roc, "roc"), (CurveKind::Lorenz, "lorenz")] {
        curve_points(&scored, kind)?.write_csv(&dir.join(format!("{name}_{id}.csv")))?;
    }
    let doc = EvaluationDocument {
        id: id.to_string(),
        n_test: test.n_rows(),
        auc: disc.auc,
        gini: disc.gini,
        ks: disc.ks,
        bootstrap_vs_baseline,
    };
    write_json(&dir.join(format!("metrics_{id}.json")), &doc)?;
    print!("{id}: AUC {:.4}  Gini {:.4}  KS {:.4}", doc.auc, doc.gini, doc.ks);
    match &doc.bootstrap_vs_baseline {
        Some(b) => println!("  ΔAUC {:+.4}  p {:.3}", b.delta_auc_point, b.p_value),
        None => println!(),
    }
    Ok(EXIT_OK)
}

fn cmd_run(cfg: &RunConfig, only: Option<&str>) -> Result<i32> {
    let specs: Vec<ExperimentSpec> = match only {
        None => cfg.suite.clone(),
        Some(id) => {
            let spec = cfg.spec(id)?;
            let mut specs: Vec<ExperimentSpec> = cfg.suite.iter().filter(|s| s.is_baseline()).cloned().collect();
            if !spec.is_baseline() {
                specs.push(spec.clone());
            }
            specs
        }
    };
    let (prepared, _) = load_prepared(cfg)?;
    let outcome = run_suite_prepared(&specs, prepared, &cfg.suite_options())?;
    let (ranking, _) = write_suite_report(output_dir(cfg)?, &outcome)?;
    print!("{}", format_ranking(&ranking));
    for f in &outcome.failures {
        eprintln!("scenario {} failed: {}", f.id, f.error);
    }
    Ok(if outcome.failures.is_empty() { EXIT_OK } else { EXIT_SCENARIO_FAILURE })
}

fn cmd_sweep(cfg: &RunConfig, technique: Technique, multipliers: &[f64]) -> Result<i32> {
    if multipliers.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(Error::Config("multipliers must be positive".into()));
    }
    let (prepared, _) = load_prepared(cfg)?;
    let report = sweep_prepared(technique, multipliers, prepared, &cfg.suite_options())?;
    write_sweep_report(output_dir(cfg)?, &report)?;
    println!("{technique} sweep (baseline AUC {:.4})", report.baseline.auc);
    for p in &report.points {
        println!(
            "  {}x  ratio {:>6.2}  AUC {:.4}{}",
            p.multiplier,
            p.result.final_ratio,
            p.result.auc,
            if p.multiplier == report.argmax_multiplier { "  <- best" } else { "" }
        );
    }
    for f in &report.failures {
        eprintln!("scenario {} failed: {}", f.id, f.error);
    }
    Ok(if report.failures.is_empty() { EXIT_OK } else { EXIT_SCENARIO_FAILURE })
}
