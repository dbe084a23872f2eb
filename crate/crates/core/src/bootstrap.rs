//! Paired bootstrap comparison of two scorers on a shared test set.
//!
//! Each iteration draws one multiset of test indices (with replacement) and
//! evaluates both models on it, giving `Δ_b = AUC_model − AUC_baseline`.
//! The p-value is the share of iterations with `Δ_b <= 0`; the interval is
//! the [2.5, 97.5] percentile range of the Δ distribution.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{auc_from_groups, auc_roc, ScoredSet};
use crate::rng;

pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub auc_model: f64,
    pub auc_baseline: f64,
    /// Full-test-set `AUC_model − AUC_baseline`.
    pub delta_auc_point: f64,
    pub delta_gini_point: f64,
    pub p_value: f64,
    pub ci95_auc: (f64, f64),
    pub ci95_gini: (f64, f64),
    pub n_iterations: usize,
    pub seed: u64,
    /// Resamples discarded because they lacked a class.
    pub redraws: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub n_iterations: usize,
    pub seed: u64,
    /// Resample each class separately, keeping class sizes fixed.
    pub stratified: bool,
}

impl BootstrapOptions {
    pub fn new(n_iterations: usize, seed: u64) -> Self {
        Self {
            n_iterations,
            seed,
            stratified: false,
        }
    }
}

/// Rows ordered by descending score, cut into runs of equal score.
struct RankedScores {
    order: Vec<usize>,
    group_ends: Vec<usize>,
}

impl RankedScores {
    fn new(scores: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let mut group_ends = Vec::new();
        for i in 1..=order.len() {
            if i == order.len() || scores[order[i]] != scores[order[i - 1]] {
                group_ends.push(i);
            }
        }
        Self { order, group_ends }
    }

    /// AUC of the resample in which row `i` appears `counts[i]` times.
    fn weighted_auc(&self, counts: &[u32], labels: &[u8], n_pos: u64, n_neg: u64) -> f64 {
        let mut start = 0;
        let groups = self.group_ends.iter().map(|&end| {
            let (mut p, mut n) = (0u64, 0u64);
            for &r in &self.order[start..end] {
                let c = counts[r] as u64;
                if labels[r] == 1 {
                    p += c;
                } else {
                    n += c;
                }
            }
            start = end;
            (p, n)
        });
        auc_from_groups(groups, n_pos, n_neg)
    }
}

/// Linear-interpolated percentile of sorted data, `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn bootstrap_compare(
    scores_model: &[f64],
    scores_baseline: &[f64],
    labels: &[u8],
    opts: &BootstrapOptions,
) -> Result<BootstrapResult> {
    let n = labels.len();
    if scores_model.len() != n || scores_baseline.len() != n {
        return Err(Error::InvalidArgument(format!(
            "score vectors ({}, {}) and labels ({n}) differ in length",
            scores_model.len(),
            scores_baseline.len()
        )));
    }
    if opts.n_iterations == 0 {
        return Err(Error::InvalidArgument("n_iterations must be positive".into()));
    }
    let auc_model = auc_roc(&ScoredSet::new(scores_model.to_vec(), labels.to_vec())?)?;
    let auc_baseline = auc_roc(&ScoredSet::new(scores_baseline.to_vec(), labels.to_vec())?)?;

    let ranked_model = RankedScores::new(scores_model);
    let ranked_baseline = RankedScores::new(scores_baseline);
    let positives: Vec<usize> = (0..n).filter(|&i| labels[i] == 1).collect();
    let negatives: Vec<usize> = (0..n).filter(|&i| labels[i] == 0).collect();

    let draws: Vec<(f64, usize)> = (0..opts.n_iterations)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::stream(opts.seed, b as u64);
            let mut counts = vec![0u32; n];
            let mut redraws = 0;
            let (n_pos, n_neg) = loop {
                counts.iter_mut().for_each(|c| *c = 0);
                if opts.stratified {
                    for class in [&positives, &negatives] {
                        for _ in 0..class.len() {
                            counts[class[r.random_range(0..class.len())]] += 1;
                        }
                    }
                    break (positives.len() as u64, negatives.len() as u64);
                }
                let mut n_pos = 0u64;
                for _ in 0..n {
                    let i = r.random_range(0..n);
                    counts[i] += 1;
                    n_pos += u64::from(labels[i]);
                }
                let n_neg = n as u64 - n_pos;
                if n_pos > 0 && n_neg > 0 {
                    break (n_pos, n_neg);
                }
                redraws += 1;
            };
            let a = ranked_model.weighted_auc(&counts, labels, n_pos, n_neg);
            let b = ranked_baseline.weighted_auc(&counts, labels, n_pos, n_neg);
            (a - b, redraws)
        })
        .collect();

    let redraws = draws.iter().map(|d| d.1).sum();
    let mut deltas: Vec<f64> = draws.into_iter().map(|d| d.0).collect();
    let p_value = deltas.iter().filter(|&&d| d <= 0.0).count() as f64 / deltas.len() as f64;
    deltas.sort_by(f64::total_cmp);
    let ci95_auc = (percentile(&deltas, 0.025), percentile(&deltas, 0.975));
    let delta_auc_point = auc_model - auc_baseline;

    Ok(BootstrapResult {
        auc_model,
        auc_baseline,
        delta_auc_point,
        delta_gini_point: 2.0 * delta_auc_point,
        p_value,
        ci95_auc,
        ci95_gini: (2.0 * ci95_auc.0, 2.0 * ci95_auc.1),
        n_iterations: opts.n_iterations,
        seed: opts.seed,
        redraws,
    })
}

/// Significant iff `p < alpha` and the AUC interval excludes zero.
pub fn significance_flag(r: &BootstrapResult, alpha: f64) -> bool {
    let (lo, hi) = r.ci95_auc;
    r.p_value < alpha && (lo > 0.0 || hi < 0.0)
}
