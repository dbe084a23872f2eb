mod common;

use common::*;
use ndarray::{array, Array2};
use rand::Rng;
use synthaug::dataset::{fit_scaler, Dataset, FeatureSchema, FeatureSpec};
use synthaug::metrics::{auc_roc, curve_points, ks_statistic, CurveKind, ScoredSet};
use synthaug::neighbors::knn;
use synthaug::oversample::{
    adasyn, adasyn_allocation, classify_borderline, oversample, NeighborhoodClass, OversampleConfig, Technique,
};
use synthaug::quality::{js_divergence, ks_two_sample, ks_two_sample_with, wasserstein_1d, KsMode};

#[test]
fn auc_matches_pair_enumeration_with_ties() {
    let mut r = rng(1);
    for _ in 0..300 {
        let n = r.random_range(2..120);
        let levels = r.random_range(1..12);
        let mut labels: Vec<u8> = (0..n).map(|_| u8::from(r.random_bool(0.3))).collect();
        labels[0] = 1;
        labels[1] = 0;
        let scores: Vec<f64> = (0..n).map(|_| r.random_range(0..levels) as f64 / 7.0).collect();
        let got = auc_roc(&ScoredSet::new(scores.clone(), labels.clone()).unwrap()).unwrap();
        assert_eq!(got, brute_auc(&scores, &labels));
    }
}

#[test]
fn roc_trapezoid_equals_auc() {
    let mut r = rng(2);
    for _ in 0..100 {
        let n = r.random_range(4..80);
        let mut labels: Vec<u8> = (0..n).map(|_| u8::from(r.random_bool(0.4))).collect();
        labels[0] = 1;
        labels[1] = 0;
        let scores: Vec<f64> = (0..n).map(|_| r.random_range(0..6) as f64).collect();
        let s = ScoredSet::new(scores, labels).unwrap();
        let roc = curve_points(&s, CurveKind::Roc).unwrap();
        assert!((roc.area() - auc_roc(&s).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn ks_statistic_matches_threshold_scan() {
    let mut r = rng(3);
    for _ in 0..100 {
        let n = r.random_range(4..60);
        let mut labels: Vec<u8> = (0..n).map(|_| u8::from(r.random_bool(0.5))).collect();
        labels[0] = 1;
        labels[1] = 0;
        let scores: Vec<f64> = (0..n).map(|_| r.random_range(0..10) as f64).collect();
        let pos: Vec<f64> = (0..n).filter(|&i| labels[i] == 1).map(|i| scores[i]).collect();
        let neg: Vec<f64> = (0..n).filter(|&i| labels[i] == 0).map(|i| scores[i]).collect();
        let got = ks_statistic(&ScoredSet::new(scores, labels).unwrap()).unwrap();
        assert!((got - brute_ks(&pos, &neg)).abs() < 1e-12);
    }
}

#[test]
fn knn_matches_full_sort() {
    let mut r = rng(4);
    for case in 0..60 {
        let rows = r.random_range(3..40);
        let cols = r.random_range(1..4);
        // Every other case uses integer grids so distance ties are common.
        let refs = if case % 2 == 0 {
            integer_matrix(&mut r, rows, cols, 2)
        } else {
            random_matrix(&mut r, rows, cols, 1.0)
        };
        let k = r.random_range(1..rows);
        let table = knn(refs.view(), refs.view(), k, true).unwrap();
        assert_eq!(table.indices, brute_knn(refs.view(), refs.view(), k, true));
        let q = random_matrix(&mut r, 5, cols, 1.0);
        let table = knn(q.view(), refs.view(), k, false).unwrap();
        assert_eq!(table.indices, brute_knn(q.view(), refs.view(), k, false));
        for row in &table.distances {
            assert!(row.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

#[test]
fn borderline_partition_matches_counting() {
    let mut r = rng(5);
    for _ in 0..80 {
        let n_min = r.random_range(3..12);
        let n_maj = r.random_range(3..18);
        let min = integer_matrix(&mut r, n_min, 2, 3);
        let maj = integer_matrix(&mut r, n_maj, 2, 3);
        let m = r.random_range(1..(n_min + n_maj - 1).min(10) + 1);
        let got = classify_borderline(min.view(), maj.view(), m).unwrap();
        let counts = brute_majority_counts(min.view(), maj.view(), m);
        assert_eq!(got.majority_counts, counts);
        for (class, &c) in got.classes.iter().zip(&counts) {
            let want = match zone(c, m) {
                Zone::Safe => NeighborhoodClass::Safe,
                Zone::Danger => NeighborhoodClass::Danger,
                Zone::Noise => NeighborhoodClass::Noise,
            };
            assert_eq!(*class, want);
        }
    }
}

#[test]
fn hand_built_borderline_fixture() {
    // Minority: a tight triple far left (safe), one point inside the majority
    // cluster (noise), and two points on the boundary (danger). m = 3.
    let min = array![[-5.0, 0.0], [-5.0, 1.0], [-4.0, 0.0], [5.0, 0.0], [2.0, 0.0], [2.5, 0.0]];
    let maj = array![[5.0, 1.0], [5.0, -1.0], [6.0, 0.0], [4.0, 0.0], [1.0, 1.0], [1.0, -1.0]];
    let got = classify_borderline(min.view(), maj.view(), 3).unwrap();
    assert_eq!(got.majority_counts, vec![1, 1, 1, 3, 2, 2]);
    use NeighborhoodClass::*;
    assert_eq!(got.classes, vec![Safe, Safe, Safe, Noise, Danger, Danger]);
    assert_eq!(got.danger_indices(), vec![4, 5]);
}

#[test]
fn adasyn_allocation_matches_rational_oracle() {
    let mut r = rng(6);
    for _ in 0..150 {
        let n_min = r.random_range(2..=50);
        let n_maj = r.random_range(2..60);
        let min = random_matrix(&mut r, n_min, 2, 1.0);
        let maj = random_matrix(&mut r, n_maj, 2, 1.5);
        let k = r.random_range(1..n_min.min(8) + 1).min(n_min - 1).max(1);
        let total = r.random_range(0..3 * n_min + 1);
        let got = adasyn_allocation(min.view(), maj.view(), k, total).unwrap();
        let deltas = brute_majority_counts(min.view(), maj.view(), k);
        assert_eq!(got.majority_counts, deltas);
        let oracle = adasyn_oracle(&deltas, k, total);
        for i in 0..n_min {
            let exact = |q: num_rational::Ratio<i64>| *q.numer() as f64 / *q.denom() as f64;
            assert!((got.ratios[i] - exact(oracle.ratios[i])).abs() < 1e-15);
            assert!((got.normalized[i] - exact(oracle.normalized[i])).abs() < 1e-15);
        }
        assert_eq!(got.counts, oracle.counts);
        assert_eq!(got.counts.iter().sum::<usize>(), total);
    }
}

#[test]
fn synthetic_rows_lie_on_neighbor_segments() {
    let mut r = rng(7);
    for technique in Technique::ALL {
        for case in 0..20 {
            let min = random_matrix(&mut r, 30, 3, 1.0);
            let mut maj = random_matrix(&mut r, 90, 3, 2.0);
            maj.mapv_inplace(|v| v * 0.7 + 0.2);
            let cfg = OversampleConfig::new(technique, 1.0 + (case % 3) as f64 * 0.5, case);
            let batch = match oversample(min.view(), maj.view(), &cfg) {
                Ok(b) => b,
                Err(synthaug::Error::NoBorderline) => continue,
                Err(e) => panic!("{e}"),
            };
            assert_eq!(batch.len(), cfg.target_count(30));
            let neighbors = brute_knn(min.view(), min.view(), cfg.k_neighbors, true);
            for (row, p) in batch.x.rows().into_iter().zip(&batch.provenance) {
                assert!(neighbors[p.parent_i].contains(&p.parent_j));
                assert!((0.0..1.0).contains(&p.lambda));
                for c in 0..3 {
                    let (a, b) = (min[[p.parent_i, c]], min[[p.parent_j, c]]);
                    assert!(row[c] >= a.min(b) - 1e-9 && row[c] <= a.max(b) + 1e-9);
                    assert!((row[c] - (a + p.lambda * (b - a))).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn adasyn_rows_follow_allocation() {
    let mut r = rng(8);
    let min = random_matrix(&mut r, 25, 2, 1.0);
    let maj = random_matrix(&mut r, 80, 2, 1.0);
    let cfg = OversampleConfig::new(Technique::Adasyn, 2.0, 3);
    let (batch, alloc) = adasyn(min.view(), maj.view(), &cfg).unwrap();
    let mut per_base = vec![0usize; 25];
    for p in &batch.provenance {
        per_base[p.parent_i] += 1;
    }
    assert_eq!(per_base, alloc.counts);
}

#[test]
fn quality_metrics_match_formulas() {
    let mut r = rng(9);
    for _ in 0..100 {
        let na = r.random_range(1..100);
        let nb = r.random_range(1..100);
        let a: Vec<f64> = (0..na).map(|_| r.random_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..nb).map(|_| r.random_range(-2.0..4.0)).collect();
        let ks = ks_two_sample(&a, &b).unwrap();
        assert!((ks.statistic - brute_ks(&a, &b)).abs() < 1e-9);
        assert!((wasserstein_1d(&a, &b).unwrap() - brute_wasserstein(&a, &b)).abs() < 1e-9);
        assert!((js_divergence(&a, &b, 50).unwrap() - brute_js(&a, &b, 50)).abs() < 1e-9);
    }
    // Integer-valued samples exercise the tie handling of KS and W1.
    for _ in 0..50 {
        let a: Vec<f64> = (0..r.random_range(1..60)).map(|_| r.random_range(0..5) as f64).collect();
        let b: Vec<f64> = (0..r.random_range(1..60)).map(|_| r.random_range(0..7) as f64).collect();
        assert!((ks_two_sample(&a, &b).unwrap().statistic - brute_ks(&a, &b)).abs() < 1e-9);
        assert!((wasserstein_1d(&a, &b).unwrap() - brute_wasserstein(&a, &b)).abs() < 1e-9);
    }
}

#[test]
fn exact_ks_matches_permutation_enumeration() {
    let mut r = rng(10);
    for _ in 0..40 {
        let na = r.random_range(1..8);
        let nb = r.random_range(1..8);
        let a: Vec<f64> = (0..na).map(|_| r.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..nb).map(|_| r.random_range(0.2..1.2)).collect();
        let got = ks_two_sample_with(&a, &b, KsMode::Exact).unwrap();
        assert!((got.p_value - permutation_ks_p(&a, &b)).abs() < 1e-12, "{a:?} {b:?}");
    }
}

#[test]
fn asymptotic_ks_p_tracks_exact_for_moderate_samples() {
    let mut r = rng(11);
    let a: Vec<f64> = (0..25).map(|_| r.random_range(0.0..1.0)).collect();
    let b: Vec<f64> = (0..25).map(|_| r.random_range(0.1..1.1)).collect();
    let exact = ks_two_sample_with(&a, &b, KsMode::Exact).unwrap().p_value;
    let asym = ks_two_sample(&a, &b).unwrap().p_value;
    assert!((exact - asym).abs() < 0.08, "exact {exact} asymptotic {asym}");
}

#[test]
fn scaler_matches_streaming_statistics() {
    let mut r = rng(12);
    let x: Array2<f64> = Array2::from_shape_fn((5_000, 3), |(_, j)| r.random_range(0.0..1.0) * (j + 1) as f64 * 1e3);
    let schema = FeatureSchema::new(
        vec![FeatureSpec::continuous("a"), FeatureSpec::continuous("b"), FeatureSpec::continuous("c")],
        "y",
    )
    .unwrap();
    let y = (0..5_000).map(|i| u8::from(i % 3 == 0)).collect();
    let d = Dataset::new(x.clone(), y, schema).unwrap();
    let s = fit_scaler(&d).unwrap();
    for j in 0..3 {
        let (mean, var) = welford(x.column(j).iter().copied());
        assert!((s.means[j] - mean).abs() < 1e-9 * mean.abs().max(1.0));
        assert!((s.std_devs[j] - var.sqrt()).abs() < 1e-9 * var.sqrt());
    }
}
