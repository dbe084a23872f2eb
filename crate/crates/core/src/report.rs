//! Report files: one JSON document plus plot-ready CSV tables.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bootstrap::significance_flag;
use crate::error::{Error, Result};
use crate::harness::{
    rank_results, Augmentation, ExperimentResult, RankedRow, ScenarioFailure, SuiteOptions, SuiteOutcome,
    SweepReport,
};
use crate::metrics::{curve_points, CurveKind, ScoredSet};
use crate::quality::write_quality_csv;

#[derive(Serialize)]
struct SuiteMetadata<'a> {
    tool: &'static str,
    version: &'static str,
    options: &'a SuiteOptions,
    n_train_baseline: usize,
    n_test: usize,
    test_positives: usize,
    test_digest_before: &'a str,
    test_digest_after: &'a str,
}

#[derive(Serialize)]
struct SuiteDocument<'a> {
    metadata: SuiteMetadata<'a>,
    ranking: &'a [RankedRow],
    results: &'a [ExperimentResult],
    failures: &'a [ScenarioFailure],
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn finish(w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .sync_all()
        .map_err(|e| Error::io(path, e))
}

fn fmt_p(p: Option<f64>) -> String {
    p.map_or_else(|| "---".to_string(), |p| format!("{p:.3}"))
}

pub fn write_ranking_csv(path: &Path, rows: &[RankedRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "rank", "id", "experiment", "n_train", "target_pct", "auc", "gini", "ks", "delta_auc", "p_value",
        "significant",
    ])?;
    for r in rows {
        w.write_record([
            r.rank.to_string(),
            r.id.clone(),
            r.label.clone(),
            r.n_train.to_string(),
            format!("{:.1}", r.target_pct),
            format!("{:.4}", r.auc),
            format!("{:.4}", r.gini),
            format!("{:.4}", r.ks),
            format!("{:+.4}", r.delta_auc),
            fmt_p(r.p_value),
            if r.significant { "*".into() } else { String::new() },
        ])?;
    }
    finish(w, path)
}

pub fn write_composition_csv(path: &Path, results: &[ExperimentResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "id", "technique", "multiplier", "n_train", "n_synthetic", "n_majority", "n_minority",
        "minority_fraction", "final_ratio",
    ])?;
    for r in results {
        w.write_record([
            r.id.clone(),
            r.technique.to_string(),
            r.multiplier.to_string(),
            r.n_train.to_string(),
            r.n_synthetic.to_string(),
            r.n_majority.to_string(),
            r.n_minority.to_string(),
            format!("{:.6}", r.minority_fraction),
            format!("{:.4}", r.final_ratio),
        ])?;
    }
    finish(w, path)
}

/// Detailed baseline comparison for every augmented scenario.
pub fn write_significance_csv(path: &Path, results: &[ExperimentResult], alpha: f64) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "id", "experiment", "auc_baseline", "auc_model", "gini_baseline", "gini_model", "delta_auc",
        "delta_auc_rel_pct", "delta_gini", "delta_gini_rel_pct", "p_value", "ci95_auc_low", "ci95_auc_high",
        "ci95_gini_low", "ci95_gini_high", "n_iterations", "significant",
    ])?;
    for r in results {
        let Some(b) = &r.bootstrap_vs_baseline else { continue };
        let gini_base = 2.0 * b.auc_baseline - 1.0;
        w.write_record([
            r.id.clone(),
            r.label.clone(),
            format!("{:.6}", b.auc_baseline),
            format!("{:.6}", b.auc_model),
            format!("{gini_base:.6}"),
            format!("{:.6}", r.gini),
            format!("{:+.6}", b.delta_auc_point),
            format!("{:+.2}", 100.0 * b.delta_auc_point / b.auc_baseline),
            format!("{:+.6}", b.delta_gini_point),
            format!("{:+.2}", 100.0 * b.delta_gini_point / gini_base),
            format!("{:.3}", b.p_value),
            format!("{:+.6}", b.ci95_auc.0),
            format!("{:+.6}", b.ci95_auc.1),
            format!("{:+.6}", b.ci95_gini.0),
            format!("{:+.6}", b.ci95_gini.1),
            b.n_iterations.to_string(),
            significance_flag(b, alpha).to_string(),
        ])?;
    }
    finish(w, path)
}

/// Baseline plus the single-technique scenarios at multiplier 1.
pub fn write_technique_comparison_csv(path: &Path, results: &[ExperimentResult], alpha: f64) -> Result<()> {
    let mut rows: Vec<&ExperimentResult> = results
        .iter()
        .filter(|r| {
            r.technique == Augmentation::None
                || (r.multiplier == 1.0 && r.technique != Augmentation::Ensemble)
        })
        .collect();
    rows.sort_by(|a, b| b.auc.total_cmp(&a.auc).then(a.id.cmp(&b.id)));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "experiment", "n_train", "auc", "gini", "delta_auc", "p_value", "significant"])?;
    for r in rows {
        let b = r.bootstrap_vs_baseline.as_ref();
        w.write_record([
            r.id.clone(),
            r.label.clone(),
            r.n_train.to_string(),
            format!("{:.4}", r.auc),
            format!("{:.4}", r.gini),
            format!("{:+.4}", b.map_or(0.0, |b| b.delta_auc_point)),
            fmt_p(b.map(|b| b.p_value)),
            b.is_some_and(|b| significance_flag(b, alpha)).to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn write_sweep_csv(path: &Path, sweep: &SweepReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["multiplier", "final_ratio", "n_train", "auc", "gini", "delta_auc", "p_value", "trend"])?;
    let base = &sweep.baseline;
    w.write_record([
        "0".to_string(),
        format!("{:.2}", base.final_ratio),
        base.n_train.to_string(),
        format!("{:.4}", base.auc),
        format!("{:.4}", base.gini),
        format!("{:+.4}", 0.0),
        "---".to_string(),
        "---".to_string(),
    ])?;
    let mut prev_auc = base.auc;
    for p in &sweep.points {
        let r = &p.result;
        let b = r.bootstrap_vs_baseline.as_ref();
        let trend = if p.multiplier == sweep.argmax_multiplier {
            "peak"
        } else if r.auc > prev_auc {
            "up"
        } else {
            "down"
        };
        prev_auc = r.auc;
        w.write_record([
            p.multiplier.to_string(),
            format!("{:.2}", r.final_ratio),
            r.n_train.to_string(),
            format!("{:.4}", r.auc),
            format!("{:.4}", r.gini),
            format!("{:+.4}", b.map_or(r.auc - base.auc, |b| b.delta_auc_point)),
            fmt_p(b.map(|b| b.p_value)),
            trend.to_string(),
        ])?;
    }
    finish(w, path)
}

pub fn write_timings_csv(path: &Path, results: &[ExperimentResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "wall_time_secs"])?;
    for r in results {
        w.write_record([r.id.clone(), format!("{:.3}", r.wall_time_secs)])?;
    }
    finish(w, path)
}

/// Write `report.json` and all CSV tables / curves into `dir`. Returns the
/// ranking and the list of files written.
pub fn write_suite_report(dir: &Path, outcome: &SuiteOutcome) -> Result<(Vec<RankedRow>, Vec<PathBuf>)> {
    create_dir(dir)?;
    let alpha = outcome.options.bootstrap.alpha;
    let ranking = rank_results(&outcome.results, alpha);
    let test = &outcome.prepared.split.test;
    let doc = SuiteDocument {
        metadata: SuiteMetadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            options: &outcome.options,
            n_train_baseline: outcome.prepared.split.train.n_rows(),
            n_test: test.n_rows(),
            test_positives: test.n_positive(),
            test_digest_before: &outcome.test_digest_before,
            test_digest_after: &outcome.test_digest_after,
        },
        ranking: &ranking,
        results: &outcome.results,
        failures: &outcome.failures,
    };
    let mut written = Vec::new();
    let path = dir.join("report.json");
    write_json(&path, &doc)?;
    written.push(path);

    let path = dir.join("ranking.csv");
    write_ranking_csv(&path, &ranking)?;
    written.push(path);
    let path = dir.join("composition.csv");
    write_composition_csv(&path, &outcome.results)?;
    written.push(path);
    let path = dir.join("significance.csv");
    write_significance_csv(&path, &outcome.results, alpha)?;
    written.push(path);
    let path = dir.join("technique_comparison.csv");
    write_technique_comparison_csv(&path, &outcome.results, alpha)?;
    written.push(path);
    let path = dir.join("timings.csv");
    write_timings_csv(&path, &outcome.results)?;
    written.push(path);

    let labels = &outcome.prepared.test_std.y;
    for run in &outcome.runs {
        let id = &run.result.id;
        let scored = ScoredSet::new(run.test_scores.clone(), labels.clone())?;
        for (kind, name) in [(CurveKind::Roc, "roc"), (CurveKind::Lorenz, "lorenz")] {
            let path = dir.join(format!("{name}_{id}.csv"));
            curve_points(&scored, kind)?.write_csv(&path)?;
            written.push(path);
        }
        if let Some(q) = &run.result.quality {
            let path = dir.join(format!("quality_{id}.csv"));
            write_quality_csv(&path, q)?;
            written.push(path);
        }
    }
    Ok((ranking, written))
}

pub fn write_sweep_report(dir: &Path, sweep: &SweepReport) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let key = sweep.technique.key();
    let json = dir.join(format!("sweep_{key}.json"));
    write_json(&json, sweep)?;
    let csv = dir.join(format!("sweep_{key}.csv"));
    write_sweep_csv(&csv, sweep)?;
    Ok(vec![json, csv])
}

/// Fixed-width ranking table for terminals.
pub fn format_ranking(rows: &[RankedRow]) -> String {
    let mut out = format!(
        "{:>4}  {:<24} {:>8} {:>8} {:>7} {:>7} {:>9} {:>8}\n",
        "Rank", "Experiment", "N Train", "Target%", "AUC", "Gini", "ΔAUC", "p-value"
    );
    for r in rows {
        out.push_str(&format!(
            "{:>4}  {:<24} {:>8} {:>7.1}% {:>7.4} {:>7.4} {:>+9.4} {:>7}{}\n",
            r.rank,
            format!("{} ({})", r.label, r.id),
            r.n_train,
            r.target_pct,
            r.auc,
            r.gini,
            r.delta_auc,
            fmt_p(r.p_value),
            if r.significant { "*" } else { " " }
        ));
    }
    out
}
