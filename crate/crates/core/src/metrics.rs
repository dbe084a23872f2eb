//! Threshold-free discrimination metrics.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scores paired with binary labels (1 = positive / default).
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredSet {
    scores: Vec<f64>,
    labels: Vec<u8>,
    n_pos: usize,
}

impl ScoredSet {
    pub fn new(scores: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} scores but {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidArgument("labels must be 0 or 1".into()));
        }
        if scores.iter().any(|s| s.is_nan()) {
            return Err(Error::InvalidArgument("scores contain NaN".into()));
        }
        let n_pos = labels.iter().filter(|&&l| l == 1).count();
        Ok(Self { scores, labels, n_pos })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    pub fn n_neg(&self) -> usize {
        self.len() - self.n_pos
    }

    fn require_both_classes(&self) -> Result<()> {
        if self.n_pos == 0 || self.n_neg() == 0 {
            return Err(Error::UndefinedMetric(format!(
                "need both classes, got {} positive / {} negative",
                self.n_pos,
                self.n_neg()
            )));
        }
        Ok(())
    }

    /// Indices sorted by descending score (ties by index).
    fn descending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]).then(a.cmp(&b)));
        order
    }

    /// `(positives, negatives)` per distinct score, highest score first.
    fn tie_groups(&self) -> Vec<(usize, usize)> {
        let order = self.descending_order();
        let mut groups = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let s = self.scores[order[i]];
            let (mut pos, mut neg) = (0, 0);
            while i < order.len() && self.scores[order[i]] == s {
                if self.labels[order[i]] == 1 {
                    pos += 1;
                } else {
                    neg += 1;
                }
                i += 1;
            }
            groups.push((pos, neg));
        }
        groups
    }
}

/// AUC from per-group counts ordered by descending score:
/// `(2 · concordant + ties) / (2 · n_pos · n_neg)` in integer arithmetic.
pub(crate) fn auc_from_groups<I>(groups: I, n_pos: u64, n_neg: u64) -> f64
where
    I: IntoIterator<Item = (u64, u64)>,
{
    let mut neg_below = n_neg as u128;
    let mut twice_concordant: u128 = 0;
    for (pos, neg) in groups {
        neg_below -= neg as u128;
        twice_concordant += 2 * pos as u128 * neg_below + pos as u128 * neg as u128;
    }
    let pairs = 2 * n_pos as u128 * n_neg as u128;
    twice_concordant as f64 / pairs as f64
}

/// Area under the ROC curve, half credit for tied scores.
pub fn auc_roc(s: &ScoredSet) -> Result<f64> {
    s.require_both_classes()?;
    let groups = s.tie_groups().into_iter().map(|(p, n)| (p as u64, n as u64));
    Ok(auc_from_groups(groups, s.n_pos() as u64, s.n_neg() as u64))
}

pub fn gini(auc: f64) -> f64 {
    2.0 * auc - 1.0
}

/// Largest gap between the per-class empirical score CDFs.
pub fn ks_statistic(s: &ScoredSet) -> Result<f64> {
    s.require_both_classes()?;
    let (np, nn) = (s.n_pos() as f64, s.n_neg() as f64);
    let (mut cp, mut cn) = (0usize, 0usize);
    let mut best: f64 = 0.0;
    for (pos, neg) in s.tie_groups() {
        cp += pos;
        cn += neg;
        best = best.max((cp as f64 / np - cn as f64 / nn).abs());
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// (false positive rate, true positive rate).
    Roc,
    /// (population fraction, captured-default fraction), riskiest first.
    Lorenz,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoints {
    pub kind: CurveKind,
    pub points: Vec<(f64, f64)>,
}

impl CurvePoints {
    /// Trapezoidal area under the curve.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
            .sum()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        match self.kind {
            CurveKind::Roc => w.write_record(["fpr", "tpr"])?,
            CurveKind::Lorenz => w.write_record(["population_fraction", "default_fraction"])?,
        }
        for &(x, y) in &self.points {
            w.write_record([x.to_string(), y.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// One point per distinct score threshold, sweeping from the highest score
/// down, starting at (0, 0) and ending at (1, 1).
pub fn curve_points(s: &ScoredSet, kind: CurveKind) -> Result<CurvePoints> {
    s.require_both_classes()?;
    let (np, nn, n) = (s.n_pos() as f64, s.n_neg() as f64, s.len() as f64);
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut points = vec![(0.0, 0.0)];
    for (pos, neg) in s.tie_groups() {
        tp += pos;
        fp += neg;
        let x = match kind {
            CurveKind::Roc => fp as f64 / nn,
            CurveKind::Lorenz => (tp + fp) as f64 / n,
        };
        points.push((x, tp as f64 / np));
    }
    Ok(CurvePoints { kind, points })
}

/// AUC, Gini and KS of a scored set in one pass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrimination {
    pub auc: f64,
    pub gini: f64,
    pub ks: f64,
}

pub fn discrimination(s: &ScoredSet) -> Result<Discrimination> {
    let auc = auc_roc(s)?;
    Ok(Discrimination {
        auc,
        gini: gini(auc),
        ks: ks_statistic(s)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(scores: &[f64], labels: &[u8]) -> ScoredSet {
        ScoredSet::new(scores.to_vec(), labels.to_vec()).unwrap()
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc_roc(&set(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1])).unwrap(), 1.0);
        assert_eq!(auc_roc(&set(&[0.3; 4], &[0, 1, 0, 1])).unwrap(), 0.5);
        // Pairs (pos, neg): (0.3,0.4) lose, (0.3,0.2) win, (0.8,0.4) win, (0.8,0.2) win.
        assert_eq!(auc_roc(&set(&[0.4, 0.3, 0.2, 0.8], &[0, 1, 0, 1])).unwrap(), 0.75);
        assert!(matches!(
            auc_roc(&set(&[0.1, 0.2], &[1, 1])),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn gini_examples() {
        assert!((gini(0.677839) - 0.355678).abs() < 1e-12);
        assert_eq!(gini(0.5), 0.0);
        assert_eq!(gini(1.0), 1.0);
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&set(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1])).unwrap(), 1.0);
        assert_eq!(ks_statistic(&set(&[0.1, 0.5, 0.1, 0.5], &[0, 0, 1, 1])).unwrap(), 0.0);
        // Descending: 0.9(+) 0.6(-) 0.4(+) 0.1(-): gaps 0.5, 0.0, 0.5, 0.0.
        assert_eq!(ks_statistic(&set(&[0.1, 0.6, 0.4, 0.9], &[0, 0, 1, 1])).unwrap(), 0.5);
    }

    #[test]
    fn curve_examples() {
        let perfect = set(&[0.9, 0.8, 0.1, 0.2, 0.3], &[1, 1, 0, 0, 0]);
        let lorenz = curve_points(&perfect, CurveKind::Lorenz).unwrap();
        assert_eq!(lorenz.points[2], (0.4, 1.0));
        assert_eq!(*lorenz.points.last().unwrap(), (1.0, 1.0));

        let flat = set(&[0.5; 4], &[1, 0, 0, 1]);
        let roc = curve_points(&flat, CurveKind::Roc).unwrap();
        assert_eq!(roc.points, vec![(0.0, 0.0), (1.0, 1.0)]);

        // Six rows, descending scores 0.9+ 0.8- 0.7+ 0.6- 0.5- 0.4+.
        let s = set(&[0.4, 0.5, 0.6, 0.7, 0.8, 0.9], &[1, 0, 0, 1, 0, 1]);
        let roc = curve_points(&s, CurveKind::Roc).unwrap();
        let third = 1.0 / 3.0;
        let expect = [
            (0.0, 0.0),
            (0.0, third),
            (third, third),
            (third, 2.0 * third),
            (2.0 * third, 2.0 * third),
            (1.0, 2.0 * third),
            (1.0, 1.0),
        ];
        for (got, want) in roc.points.iter().zip(expect) {
            assert!((got.0 - want.0).abs() < 1e-15 && (got.1 - want.1).abs() < 1e-15);
        }
        assert!((roc.area() - auc_roc(&s).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(ScoredSet::new(vec![0.1], vec![0, 1]).is_err());
        assert!(ScoredSet::new(vec![0.1, 0.2], vec![0, 3]).is_err());
    }
}
