//! Per-feature similarity between real and synthetic samples.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_JS_BINS: usize = 50;
/// Largest per-sample size accepted by [`KsMode::Exact`].
pub const EXACT_KS_MAX_N: usize = 25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KsMode {
    /// Limiting Kolmogorov distribution at `sqrt(n_a n_b / (n_a + n_b)) · D`.
    Asymptotic,
    /// Exact permutation distribution (no ties assumed), small samples only.
    Exact,
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

fn require_nonempty(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("both samples must be nonempty"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("samples must be finite".into()));
    }
    Ok(())
}

/// `max |i·n_b − j·n_a|` over the merged ECDF steps, i.e. `D · n_a · n_b`.
fn ks_gap_scaled(a: &[f64], b: &[f64]) -> u64 {
    let (na, nb) = (a.len() as i64, b.len() as i64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0i64;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        best = best.max((i as i64 * nb - j as i64 * na).abs());
    }
    best as u64
}

/// Survival function of the Kolmogorov distribution, `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Theta-function form converges fast for small λ.
        let pi2 = std::f64::consts::PI.powi(2);
        let s: f64 = (1..=20)
            .map(|k| {
                let odd = (2 * k - 1) as f64;
                (-odd * odd * pi2 / (8.0 * lambda * lambda)).exp()
            })
            .sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0);
    }
    let s: f64 = (1..=100)
        .map(|k| {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

/// `P(D >= observed)` under the null by counting monotone lattice paths that
/// stay strictly inside the observed band.
fn exact_p_value(na: usize, nb: usize, gap_scaled: u64) -> f64 {
    let inside = |i: usize, j: usize| ((i * nb) as i64 - (j * na) as i64).unsigned_abs() < gap_scaled;
    let mut paths = vec![vec![0.0f64; nb + 1]; na + 1];
    for i in 0..=na {
        for j in 0..=nb {
            if !inside(i, j) {
                continue;
            }
            paths[i][j] = if i == 0 && j == 0 {
                1.0
            } else {
                let up = if i > 0 { paths[i - 1][j] } else { 0.0 };
                let left = if j > 0 { paths[i][j - 1] } else { 0.0 };
                up + left
            };
        }
    }
    let total: f64 = (1..=nb).fold(1.0, |acc, k| acc * (na + k) as f64 / k as f64);
    (1.0 - paths[na][nb] / total).clamp(0.0, 1.0)
}

pub fn ks_two_sample_with(a: &[f64], b: &[f64], mode: KsMode) -> Result<KsTest> {
    require_nonempty(a, b)?;
    let (sa, sb) = (sorted(a), sorted(b));
    let (na, nb) = (a.len(), b.len());
    let gap = ks_gap_scaled(&sa, &sb);
    let statistic = gap as f64 / (na as f64 * nb as f64);
    let p_value = match mode {
        KsMode::Asymptotic => {
            let en = na as f64 * nb as f64 / (na + nb) as f64;
            kolmogorov_sf(en.sqrt() * statistic)
        }
        KsMode::Exact => {
            if na > EXACT_KS_MAX_N || nb > EXACT_KS_MAX_N {
                return Err(Error::InvalidArgument(format!(
                    "exact KS supports samples of at most {EXACT_KS_MAX_N} values"
                )));
            }
            if gap == 0 {
                1.0
            } else {
                exact_p_value(na, nb, gap)
            }
        }
    };
    Ok(KsTest { statistic, p_value })
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsTest> {
    ks_two_sample_with(a, b, KsMode::Asymptotic)
}

/// W₁ between the two empirical distributions: `∫ |F_a − F_b| dx`.
pub fn wasserstein_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    require_nonempty(a, b)?;
    let (sa, sb) = (sorted(a), sorted(b));
    let mut all: Vec<f64> = sa.iter().chain(&sb).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut total = 0.0;
    for w in all.windows(2) {
        while i < sa.len() && sa[i] <= w[0] {
            i += 1;
        }
        while j < sb.len() && sb[j] <= w[0] {
            j += 1;
        }
        total += (i as f64 / na - j as f64 / nb).abs() * (w[1] - w[0]);
    }
    Ok(total)
}

/// Equal-width histogram over `[lo, hi]`, normalized to probabilities.
fn histogram(v: &[f64], lo: f64, hi: f64, n_bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0; n_bins];
    let width = (hi - lo) / n_bins as f64;
    for &x in v {
        let bin = if width > 0.0 {
            (((x - lo) / width).floor() as usize).min(n_bins - 1)
        } else {
            0
        };
        counts[bin] += 1.0;
    }
    let n = v.len() as f64;
    counts.iter_mut().for_each(|c| *c /= n);
    counts
}

fn kl_base2(p: &[f64], m: &[f64]) -> f64 {
    p.iter()
        .zip(m)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &mi)| pi * (pi / mi).log2())
        .sum()
}

/// Jensen-Shannon divergence (log base 2, so in `[0, 1]`) of the two samples'
/// histograms on `n_bins` equal-width bins spanning their combined range.
pub fn js_divergence(a: &[f64], b: &[f64], n_bins: usize) -> Result<f64> {
    require_nonempty(a, b)?;
    if n_bins == 0 {
        return Err(Error::InvalidArgument("n_bins must be positive".into()));
    }
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    let p = histogram(a, lo, hi, n_bins);
    let q = histogram(b, lo, hi, n_bins);
    let m: Vec<f64> = p.iter().zip(&q).map(|(x, y)| 0.5 * (x + y)).collect();
    Ok((0.5 * kl_base2(&p, &m) + 0.5 * kl_base2(&q, &m)).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureQualityRow {
    pub feature: String,
    pub ks_stat: f64,
    pub ks_p: f64,
    pub wasserstein: f64,
    pub js_divergence: f64,
    /// `ks_p < 0.05`.
    pub shifted: bool,
}

/// Compare real and synthetic rows feature by feature (original units).
pub fn quality_report(real: &Dataset, synthetic: &Dataset, n_bins: usize) -> Result<Vec<FeatureQualityRow>> {
    if real.schema.features != synthetic.schema.features {
        return Err(Error::Schema("real and synthetic schemas differ".into()));
    }
    real.schema
        .features
        .iter()
        .enumerate()
        .map(|(j, spec)| {
            let a = real.x.column(j).to_vec();
            let b = synthetic.x.column(j).to_vec();
            let ks = ks_two_sample(&a, &b)?;
            Ok(FeatureQualityRow {
                feature: spec.name.clone(),
                ks_stat: ks.statistic,
                ks_p: ks.p_value,
                wasserstein: wasserstein_1d(&a, &b)?,
                js_divergence: js_divergence(&a, &b, n_bins)?,
                shifted: ks.p_value < 0.05,
            })
        })
        .collect()
}

pub fn write_quality_csv(path: &Path, rows: &[FeatureQualityRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["feature", "ks_stat", "ks_p_value", "wasserstein", "js_divergence", "shifted"])?;
    for r in rows {
        w.write_record([
            r.feature.clone(),
            format!("{:.4}", r.ks_stat),
            format!("{:.3}", r.ks_p),
            format!("{:.4}", r.wasserstein),
            format!("{:.4}", r.js_divergence),
            r.shifted.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
