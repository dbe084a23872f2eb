//! Brute-force reference implementations shared by the integration tests.
//! Each one follows the textbook definition as directly as possible and
//! shares no code with the library.

#![allow(dead_code)]

use ndarray::{Array2, ArrayView2};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// `(2 · concordant + tied) / (2 · n_pos · n_neg)` by enumerating every pair.
pub fn brute_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut twice, mut pairs) = (0u64, 0u64);
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 2;
            if si > sj {
                twice += 2;
            } else if si == sj {
                twice += 1;
            }
        }
    }
    twice as f64 / pairs as f64
}

/// Full sort of every candidate by (squared distance, index).
pub fn brute_knn(queries: ArrayView2<f64>, refs: ArrayView2<f64>, k: usize, exclude_self: bool) -> Vec<Vec<usize>> {
    (0..queries.nrows())
        .map(|q| {
            let mut all: Vec<(f64, usize)> = (0..refs.nrows())
                .filter(|&r| !(exclude_self && r == q))
                .map(|r| {
                    let d: f64 = queries.row(q).iter().zip(refs.row(r)).map(|(a, b)| (a - b).powi(2)).sum();
                    (d, r)
                })
                .collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            all.into_iter().take(k).map(|p| p.1).collect()
        })
        .collect()
}

/// Majority rows among each minority row's `m` neighbors in
/// `[minority; majority]`, self excluded.
pub fn brute_majority_counts(min: ArrayView2<f64>, maj: ArrayView2<f64>, m: usize) -> Vec<usize> {
    let full = ndarray::concatenate(ndarray::Axis(0), &[min, maj]).unwrap();
    brute_knn(min, full.view(), m, true)
        .iter()
        .map(|row| row.iter().filter(|&&r| r >= min.nrows()).count())
        .collect()
}

#[derive(Debug, PartialEq, Eq, Clone, Copy)]
pub enum Zone {
    Safe,
    Danger,
    Noise,
}

pub fn zone(majority: usize, m: usize) -> Zone {
    if majority == m {
        Zone::Noise
    } else if majority as f64 >= m as f64 / 2.0 {
        Zone::Danger
    } else {
        Zone::Safe
    }
}

/// ADASYN quantities in exact rational arithmetic:
/// `r_i = Δ_i / k`, `r̂_i = r_i / Σ r`, and `g_i` by handing out
/// `G − Σ floor(r̂_i G)` extra rows one at a time to the largest remaining
/// fractional parts (lowest index first on ties).
pub struct AdasynOracle {
    pub ratios: Vec<Ratio<i64>>,
    pub normalized: Vec<Ratio<i64>>,
    pub counts: Vec<usize>,
}

pub fn adasyn_oracle(deltas: &[usize], k: usize, total: usize) -> AdasynOracle {
    let ratios: Vec<Ratio<i64>> = deltas.iter().map(|&d| Ratio::new(d as i64, k as i64)).collect();
    let sum: Ratio<i64> = ratios.iter().copied().sum();
    let normalized: Vec<Ratio<i64>> = if sum == Ratio::from_integer(0) {
        vec![Ratio::new(1, deltas.len() as i64); deltas.len()]
    } else {
        ratios.iter().map(|r| r / sum).collect()
    };
    let quotas: Vec<Ratio<i64>> = normalized.iter().map(|r| r * Ratio::from_integer(total as i64)).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor().to_integer() as usize).collect();
    let mut fractional: Vec<Ratio<i64>> = quotas.iter().map(|q| q.fract()).collect();
    while counts.iter().sum::<usize>() < total {
        let mut best = 0;
        for i in 1..fractional.len() {
            if fractional[i] > fractional[best] {
                best = i;
            }
        }
        counts[best] += 1;
        fractional[best] = Ratio::from_integer(-1);
    }
    AdasynOracle {
        ratios,
        normalized,
        counts,
    }
}

/// Two-sample KS statistic evaluated at every pooled value.
pub fn brute_ks(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |s: &[f64], v: f64| s.iter().filter(|&&x| x <= v).count() as f64 / s.len() as f64;
    a.iter().chain(b).map(|&v| (ecdf(a, v) - ecdf(b, v)).abs()).fold(0.0, f64::max)
}

/// `∫ |F_a − F_b|` with the ECDFs evaluated by counting on each gap.
pub fn brute_wasserstein(a: &[f64], b: &[f64]) -> f64 {
    let mut pts: Vec<f64> = a.iter().chain(b).copied().collect();
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let ecdf = |s: &[f64], v: f64| s.iter().filter(|&&x| x <= v).count() as f64 / s.len() as f64;
    pts.windows(2).map(|w| (ecdf(a, w[0]) - ecdf(b, w[0])).abs() * (w[1] - w[0])).sum()
}

/// JS divergence in bits over `bins` equal-width bins of the pooled range;
/// the top edge belongs to the last bin.
pub fn brute_js(a: &[f64], b: &[f64], bins: usize) -> f64 {
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    let hist = |s: &[f64]| {
        let mut h = vec![0.0; bins];
        for &x in s {
            let mut placed = false;
            for (k, slot) in h.iter_mut().enumerate() {
                let left = lo + (hi - lo) * k as f64 / bins as f64;
                let right = lo + (hi - lo) * (k + 1) as f64 / bins as f64;
                if (x >= left && x < right) || (k == bins - 1 && x >= left) {
                    *slot += 1.0;
                    placed = true;
                    break;
                }
            }
            if !placed {
                h[0] += 1.0;
            }
        }
        h.iter().map(|c| c / s.len() as f64).collect::<Vec<f64>>()
    };
    let (p, q) = (hist(a), hist(b));
    let mut js = 0.0;
    for k in 0..bins {
        let m = (p[k] + q[k]) / 2.0;
        if p[k] > 0.0 {
            js += 0.5 * p[k] * (p[k] / m).ln();
        }
        if q[k] > 0.0 {
            js += 0.5 * q[k] * (q[k] / m).ln();
        }
    }
    js / std::f64::consts::LN_2
}

/// Exact KS p-value by enumerating every way to split the pooled sample.
pub fn permutation_ks_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let observed = brute_ks(a, b);
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (i, &v) in pooled.iter().enumerate() {
            if mask >> i & 1 == 1 {
                x.push(v);
            } else {
                y.push(v);
            }
        }
        total += 1;
        if brute_ks(&x, &y) >= observed - 1e-12 {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

/// Single-pass mean and population variance (Welford).
pub fn welford(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for x in values {
        n += 1.0;
        let d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    (mean, m2 / n)
}

/// Random matrix with entries in `[-scale, scale)`.
pub fn random_matrix(r: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| r.random_range(-scale..scale))
}

/// Matrix with small integer coordinates, which produces many distance ties.
pub fn integer_matrix(r: &mut impl Rng, rows: usize, cols: usize, span: i32) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| r.random_range(-span..=span) as f64)
}
