//! Binary classification metrics: confusion counts, ROC AUC and Youden's index.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// `None` when there are no positives.
    pub fn sensitivity(&self) -> Option<f64> {
        let p = self.tp + self.fn_;
        (p > 0).then(|| self.tp as f64 / p as f64)
    }

    /// `None` when there are no negatives.
    pub fn specificity(&self) -> Option<f64> {
        let n = self.tn + self.fp;
        (n > 0).then(|| self.tn as f64 / n as f64)
    }

    pub fn youden(&self) -> Option<f64> {
        Some(self.sensitivity()? + self.specificity()? - 1.0)
    }
}

/// Point metrics at one cutoff. Undefined ratios are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub accuracy: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub auc: Option<f64>,
    pub youden: Option<f64>,
    pub cutoff: f64,
    pub counts: Confusion,
}

fn check_inputs(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch { expected: scores.len(), actual: labels.len() });
    }
    if scores.is_empty() {
        return Err(Error::InvalidConfig("no samples".into()));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::InvalidConfig("labels must be 0 or 1".into()));
    }
    Ok(())
}

fn class_counts(labels: &[u8]) -> Result<(usize, usize)> {
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateLabels("both classes are required".into()));
    }
    Ok((pos, neg))
}

/// Counts with prediction = score ≥ cutoff.
pub fn confusion(scores: &[f64], labels: &[u8], cutoff: f64) -> Result<Confusion> {
    check_inputs(scores, labels)?;
    let mut c = Confusion::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= cutoff, l == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Accuracy, sensitivity, specificity and Youden at `cutoff` (no AUC).
pub fn confusion_metrics(scores: &[f64], labels: &[u8], cutoff: f64) -> Result<EvalReport> {
    let counts = confusion(scores, labels, cutoff)?;
    Ok(EvalReport {
        n: scores.len(),
        accuracy: counts.accuracy(),
        sensitivity: counts.sensitivity(),
        specificity: counts.specificity(),
        auc: None,
        youden: counts.youden(),
        cutoff,
        counts,
    })
}

/// Confusion metrics plus AUC when both classes are present.
pub fn evaluate(scores: &[f64], labels: &[u8], cutoff: f64) -> Result<EvalReport> {
    let mut report = confusion_metrics(scores, labels, cutoff)?;
    report.auc = auc(scores, labels).ok();
    Ok(report)
}

/// Rank-based (Mann-Whitney) ROC AUC; tied scores get half credit.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    check_inputs(scores, labels)?;
    let (pos, neg) = class_counts(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j+1 share their average.
        let avg_rank = (i + j + 2) as f64 / 2.0;
        rank_sum += avg_rank * order[i..=j].iter().filter(|&&k| labels[k] == 1).count() as f64;
        i = j + 1;
    }
    let pos_f = pos as f64;
    Ok((rank_sum - pos_f * (pos_f + 1.0) / 2.0) / (pos_f * neg as f64))
}

/// Cutoff maximizing sensitivity + specificity − 1 over every distinct score
/// (and +∞). Ties resolve to the smallest cutoff.
pub fn youden(scores: &[f64], labels: &[u8]) -> Result<(f64, f64)> {
    check_inputs(scores, labels)?;
    let (pos, neg) = class_counts(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Ascending sweep: at cutoff c everything before c's first occurrence is negative.
    let (mut fn_, mut tn) = (0usize, 0usize);
    let mut best = (f64::INFINITY, f64::NEG_INFINITY);
    let mut i = 0;
    while i < order.len() {
        let cutoff = scores[order[i]];
        let j = sensitivity_j(pos, neg, fn_, tn);
        if j > best.1 {
            best = (cutoff, j);
        }
        while i < order.len() && scores[order[i]] == cutoff {
            if labels[order[i]] == 1 {
                fn_ += 1;
            } else {
                tn += 1;
            }
            i += 1;
        }
    }
    let j = sensitivity_j(pos, neg, fn_, tn);
    if j > best.1 {
        best = (f64::INFINITY, j);
    }
    Ok(best)
}

fn sensitivity_j(pos: usize, neg: usize, fn_: usize, tn: usize) -> f64 {
    (pos - fn_) as f64 / pos as f64 + tn as f64 / neg as f64 - 1.0
}
