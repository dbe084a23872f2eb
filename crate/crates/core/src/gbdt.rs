//! Class-weighted gradient boosted regression trees for binary
//! classification.
//!
//! Standard second-order boosting on the logistic loss. Positive rows carry
//! weight `scale_pos_weight`, negatives weight 1. Each round fits one tree to
//! the per-row gradient `g = w (p − y)` and hessian `h = w p (1 − p)` with
//! exact greedy split search over sorted feature values:
//!
//! ```text
//! gain = G_L² / (H_L + λ) + G_R² / (H_R + λ) − G² / (H + λ)
//! leaf = −η · G / (H + λ)
//! ```
//!
//! A split is kept only if both children carry at least `min_child_weight`
//! hessian mass. Rows go left when `x[feature] < threshold`.

use std::path::Path;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Smallest total gain worth a split.
const MIN_SPLIT_GAIN: f64 = 1e-6;
/// Base rate clamp so a single-class target still has a finite log-odds.
const BASE_RATE_EPS: f64 = 1e-12;
/// Below this many rows per node, split search stays on the calling thread.
const PARALLEL_ROWS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GbdtConfig {
    pub max_depth: usize,
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub scale_pos_weight: f64,
    pub min_child_weight: f64,
    pub reg_lambda: f64,
    pub seed: u64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        Self {
            max_depth: 6,
            learning_rate: 0.1,
            n_estimators: 100,
            scale_pos_weight: 1.0,
            min_child_weight: 1.0,
            reg_lambda: 1.0,
            seed: 42,
        }
    }
}

impl GbdtConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must lie in (0, 1]");
        }
        if self.n_estimators == 0 {
            return bad("n_estimators must be at least 1");
        }
        if !(self.scale_pos_weight > 0.0 && self.scale_pos_weight.is_finite()) {
            return bad("scale_pos_weight must be positive");
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
        if !(self.min_child_weight >= 0.0) || !(self.reg_lambda >= 0.0) {
            return bad("min_child_weight and reg_lambda must be non-negative");
        }
        Ok(())
    }
}

mod decimal {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        #[serde(with = "decimal")]
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        #[serde(with = "decimal")]
        value: f64,
    },
}

/// Binary regression tree stored as a flat node array; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] < threshold { left } else { right },
            }
        }
    }

    /// Number of split levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub format_version: u32,
    pub config: GbdtConfig,
    pub n_features: usize,
    /// Log-odds of the weighted positive rate.
    #[serde(with = "decimal")]
    pub base_score: f64,
    pub trees: Vec<Tree>,
    /// Weighted mean logistic loss on the training rows before the first
    /// round and after each round.
    pub train_loss: Vec<f64>,
}

pub fn sigmoid(margin: f64) -> f64 {
    1.0 / (1.0 + (-margin).exp())
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn weighted_logloss(margins: &[f64], y: &[u8], w: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut wsum = 0.0;
    for ((&m, &l), &wi) in margins.iter().zip(y).zip(w) {
        total += wi * if l == 1 { softplus(-m) } else { softplus(m) };
        wsum += wi;
    }
    total / wsum
}

/// `n_majority / n_minority` of a training set.
pub fn compute_scale_pos_weight(train: &Dataset) -> Result<f64> {
    scale_pos_weight_from_counts(train.n_negative(), train.n_positive())
}

pub fn scale_pos_weight_from_counts(n_majority: usize, n_minority: usize) -> Result<f64> {
    if n_majority == 0 || n_minority == 0 {
        return Err(Error::DegenerateClass(format!(
            "need both classes, got {n_majority} majority / {n_minority} minority rows"
        )));
    }
    Ok(n_majority as f64 / n_minority as f64)
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct Builder<'a> {
    x: ArrayView2<'a, f64>,
    grad: Vec<f64>,
    hess: Vec<f64>,
    cfg: &'a GbdtConfig,
    goes_left: Vec<bool>,
    row_output: Vec<f64>,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.cfg.reg_lambda)
    }

    fn best_for_feature(&self, feature: usize, order: &[u32], g_total: f64, h_total: f64) -> Option<Candidate> {
        let parent = self.score(g_total, h_total);
        let mcw = self.cfg.min_child_weight;
        let mut gl = 0.0;
        let mut hl = 0.0;
        let mut best: Option<Candidate> = None;
        for pos in 0..order.len() - 1 {
            let r = order[pos] as usize;
            gl += self.grad[r];
            hl += self.hess[r];
            let here = self.x[[r, feature]];
            let next = self.x[[order[pos + 1] as usize, feature]];
            if next <= here {
                continue;
            }
            let hr = h_total - hl;
            if hl < mcw || hr < mcw {
                continue;
            }
            let gain = self.score(gl, hl) + self.score(g_total - gl, hr) - parent;
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(Candidate {
                    gain,
                    feature,
                    threshold: next,
                });
            }
        }
        best
    }

    fn push_leaf(&mut self, rows: &[u32], g: f64, h: f64) -> usize {
        let value = -self.cfg.learning_rate * g / (h + self.cfg.reg_lambda);
        for &r in rows {
            self.row_output[r as usize] = value;
        }
        self.nodes.push(Node::Leaf { value });
        self.nodes.len() - 1
    }

    /// `sorted[f]` lists this node's rows ordered by feature `f`.
    fn build(&mut self, sorted: Vec<Vec<u32>>, depth: usize) -> usize {
        let rows = &sorted[0];
        let g: f64 = rows.iter().map(|&r| self.grad[r as usize]).sum();
        let h: f64 = rows.iter().map(|&r| self.hess[r as usize]).sum();
        if depth >= self.cfg.max_depth || rows.len() < 2 {
            return self.push_leaf(&sorted[0], g, h);
        }

        let this = &*self;
        let search = |f: usize| this.best_for_feature(f, &sorted[f], g, h);
        let per_feature: Vec<Option<Candidate>> = if rows.len() >= PARALLEL_ROWS {
            (0..sorted.len()).into_par_iter().map(search).collect()
        } else {
            (0..sorted.len()).map(search).collect()
        };
        // Strict comparison in feature order: ties keep the lowest feature.
        let mut best: Option<Candidate> = None;
        for c in per_feature.into_iter().flatten() {
            if best.is_none_or(|b| c.gain > b.gain) {
                best = Some(c);
            }
        }
        let Some(split) = best.filter(|c| c.gain > MIN_SPLIT_GAIN) else {
            return self.push_leaf(&sorted[0], g, h);
        };

        for &r in &sorted[0] {
            self.goes_left[r as usize] = self.x[[r as usize, split.feature]] < split.threshold;
        }
        let goes_left = &self.goes_left;
        let (left, right): (Vec<Vec<u32>>, Vec<Vec<u32>>) = sorted
            .into_iter()
            .map(|order| order.into_iter().partition(|&r| goes_left[r as usize]))
            .unzip();

        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });
        let l = self.build(left, depth + 1);
        let r = self.build(right, depth + 1);
        self.nodes[at] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        at
    }
}

/// Fit `cfg.n_estimators` trees. The data must be non-empty with binary
/// labels; a single-class target yields an (almost) constant model.
pub fn train(x: ArrayView2<'_, f64>, y: &[u8], cfg: &GbdtConfig) -> Result<GbdtModel> {
    cfg.validate()?;
    let n = x.nrows();
    if n < 2 || x.ncols() == 0 {
        return Err(Error::Training(format!(
            "need at least 2 rows and 1 feature, got {n} x {}",
            x.ncols()
        )));
    }
    if y.len() != n {
        return Err(Error::Training(format!("{n} rows but {} labels", y.len())));
    }
    if y.iter().any(|&l| l > 1) {
        return Err(Error::Training("labels must be 0 or 1".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Training("feature matrix contains non-finite values".into()));
    }

    let weights: Vec<f64> = y
        .iter()
        .map(|&l| if l == 1 { cfg.scale_pos_weight } else { 1.0 })
        .collect();
    let wsum: f64 = weights.iter().sum();
    let wpos: f64 = weights.iter().zip(y).filter(|(_, &l)| l == 1).map(|(w, _)| w).sum();
    let base_rate = (wpos / wsum).clamp(BASE_RATE_EPS, 1.0 - BASE_RATE_EPS);
    let base_score = (base_rate / (1.0 - base_rate)).ln();

    let d = x.ncols();
    let presorted: Vec<Vec<u32>> = (0..d)
        .into_par_iter()
        .map(|f| {
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.sort_by(|&a, &b| {
                x[[a as usize, f]]
                    .total_cmp(&x[[b as usize, f]])
                    .then(a.cmp(&b))
            });
            order
        })
        .collect();

    let mut margins = vec![base_score; n];
    let mut train_loss = Vec::with_capacity(cfg.n_estimators + 1);
    train_loss.push(weighted_logloss(&margins, y, &weights));
    let mut builder = Builder {
        x,
        grad: vec![0.0; n],
        hess: vec![0.0; n],
        cfg,
        goes_left: vec![false; n],
        row_output: vec![0.0; n],
        nodes: Vec::new(),
    };
    let mut trees = Vec::with_capacity(cfg.n_estimators);
    for _ in 0..cfg.n_estimators {
        for i in 0..n {
            let p = sigmoid(margins[i]);
            builder.grad[i] = weights[i] * (p - f64::from(y[i]));
            builder.hess[i] = weights[i] * p * (1.0 - p);
        }
        builder.nodes.clear();
        builder.build(presorted.clone(), 0);
        for (m, o) in margins.iter_mut().zip(&builder.row_output) {
            *m += o;
        }
        trees.push(Tree {
            nodes: std::mem::take(&mut builder.nodes),
        });
        train_loss.push(weighted_logloss(&margins, y, &weights));
    }

    Ok(GbdtModel {
        format_version: FORMAT_VERSION,
        config: cfg.clone(),
        n_features: d,
        base_score,
        trees,
        train_loss,
    })
}

pub fn train_dataset(train_set: &Dataset, cfg: &GbdtConfig) -> Result<GbdtModel> {
    train(train_set.x.view(), &train_set.y, cfg)
}

impl GbdtModel {
    fn check_arity(&self, cols: usize) -> Result<()> {
        if cols != self.n_features {
            return Err(Error::Schema(format!(
                "model trained on {} features, input has {cols}",
                self.n_features
            )));
        }
        Ok(())
    }

    /// Raw log-odds `base_score + Σ tree outputs` per row.
    pub fn predict_margin(&self, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        self.check_arity(x.ncols())?;
        let x = x.as_standard_layout();
        Ok(x.rows()
            .into_iter()
            .map(|row| {
                let row = row.as_slice().expect("standard layout");
                self.base_score + self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
            })
            .collect())
    }

    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        Ok(self.predict_margin(x)?.into_iter().map(sigmoid).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: GbdtModel = serde_json::from_str(s)?;
        if model.format_version != FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "unsupported model format version {}",
                model.format_version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn default_config_matches_reference_settings() {
        let c = GbdtConfig::default();
        assert_eq!((c.max_depth, c.n_estimators), (6, 100));
        assert_eq!((c.learning_rate, c.reg_lambda, c.min_child_weight), (0.1, 1.0, 1.0));
    }

    #[test]
    fn scale_pos_weight_values() {
        let w = scale_pos_weight_from_counts(63_260, 4_810).unwrap();
        assert!((w - 13.15).abs() < 0.01);
        assert_eq!(scale_pos_weight_from_counts(50, 50).unwrap(), 1.0);
        let w = scale_pos_weight_from_counts(63_260, 9_620).unwrap();
        assert!((w - 6.58).abs() < 0.03);
        assert!(matches!(
            scale_pos_weight_from_counts(10, 0),
            Err(Error::DegenerateClass(_))
        ));
    }

    #[test]
    fn depth_one_leaf_values_match_hand_computation() {
        // Two rows per side of x = 1.5; balanced labels give base score 0,
        // so p = 0.5, g = p - y = ±0.5 and h = 0.25 for every row.
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let y = [0u8, 0, 1, 1];
        let cfg = GbdtConfig {
            max_depth: 1,
            n_estimators: 1,
            min_child_weight: 0.0,
            ..GbdtConfig::default()
        };
        let m = train(x.view(), &y, &cfg).unwrap();
        assert_eq!(m.base_score, 0.0);
        let tree = &m.trees[0];
        let Node::Split { feature, threshold, left, right } = tree.nodes[0] else {
            panic!("root should split");
        };
        assert_eq!((feature, threshold), (0, 2.0));
        // G_left = 1.0, H_left = 0.5: leaf = -0.1 * 1.0 / 1.5.
        let expect_left = -0.1 * 1.0 / 1.5;
        assert_eq!(tree.nodes[left], Node::Leaf { value: expect_left });
        assert_eq!(tree.nodes[right], Node::Leaf { value: -expect_left });
    }

    #[test]
    fn single_class_target_predicts_base_rate() {
        let x = Array2::from_shape_fn((50, 2), |(i, j)| (i * (j + 2)) as f64);
        let y = vec![0u8; 50];
        let m = train(x.view(), &y, &GbdtConfig::default()).unwrap();
        for p in m.predict_proba(x.view()).unwrap() {
            assert!(p.abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_degenerate_input() {
        let x = array![[0.0]];
        assert!(matches!(
            train(x.view(), &[1], &GbdtConfig::default()),
            Err(Error::Training(_))
        ));
        let x = array![[0.0], [1.0]];
        assert!(train(x.view(), &[0, 2], &GbdtConfig::default()).is_err());
        let bad = GbdtConfig {
            learning_rate: 0.0,
            ..GbdtConfig::default()
        };
        assert!(train(x.view(), &[0, 1], &bad).is_err());
    }

    #[test]
    fn empty_ensemble_and_midpoint() {
        let m = GbdtModel {
            format_version: FORMAT_VERSION,
            config: GbdtConfig::default(),
            n_features: 1,
            base_score: 0.7,
            trees: vec![],
            train_loss: vec![],
        };
        let p = m.predict_proba(array![[1.0], [-4.0]].view()).unwrap();
        assert_eq!(p, vec![sigmoid(0.7); 2]);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(matches!(
            m.predict_proba(array![[1.0, 2.0]].view()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let x = Array2::from_shape_fn((40, 2), |(i, j)| ((i * 7 + j * 3) % 11) as f64 / 3.0);
        let y: Vec<u8> = (0..40).map(|i| u8::from(i % 3 == 0)).collect();
        let cfg = GbdtConfig {
            n_estimators: 5,
            ..GbdtConfig::default()
        };
        let m = train(x.view(), &y, &cfg).unwrap();
        let json = m.to_json().unwrap();
        assert!(json.contains("\"threshold\": \""));
        let back = GbdtModel::from_json(&json).unwrap();
        assert_eq!(back, m);
        let bumped = json.replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(GbdtModel::from_json(&bumped).is_err());
    }
}
