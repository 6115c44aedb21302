//! Binary classification metrics over flattened alignment cells.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Mat;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("shape mismatch: scores {scores:?}, pred {pred:?}, gold {gold:?}")]
    Shape {
        scores: (usize, usize),
        pred: (usize, usize),
        gold: (usize, usize),
    },
}

/// Confusion counts and the derived scores, all in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub roc_auc: f64,
}

/// Rank-based ROC AUC with half credit for ties; 0.5 by convention when the
/// labels are all one class.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return 0.5;
    }
    // Sort by score ascending and assign mid-ranks to tied groups.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1 ..= j+1 share the average rank.
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let p = positives as f64;
    let n = negatives as f64;
    (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n)
}

fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize, auc: f64) -> Metrics {
    let total = (tp + fp + tn + fn_) as f64;
    let accuracy = if total > 0.0 {
        (tp + tn) as f64 / total
    } else {
        0.0
    };
    let recall = if tp + fn_ > 0 {
        tp as f64 / (tp + fn_) as f64
    } else {
        0.0
    };
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Metrics {
        tp,
        fp,
        tn,
        fn_,
        accuracy,
        recall,
        precision,
        f1,
        roc_auc: auc,
    }
}

/// Flattens all cells into one binary classification problem against the
/// gold matrix. AUC uses the continuous scores; the remaining metrics use
/// the binary predictions.
pub fn compute_metrics(scores: &Mat, pred: &Mat, gold: &Mat) -> Result<Metrics, MetricsError> {
    if scores.shape() != pred.shape() || pred.shape() != gold.shape() {
        return Err(MetricsError::Shape {
            scores: scores.shape(),
            pred: pred.shape(),
            gold: gold.shape(),
        });
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut tn = 0;
    let mut fn_ = 0;
    for (p, g) in pred.data().iter().zip(gold.data()) {
        match (*p != 0.0, *g != 0.0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let labels: Vec<bool> = gold.data().iter().map(|&g| g != 0.0).collect();
    let auc = roc_auc(scores.data(), &labels);
    Ok(from_counts(tp, fp, tn, fn_, auc))
}

/// Micro-averaged metrics over many (scores, pred, gold) triples: all cells
/// of all triples are pooled before computing anything.
pub fn micro_metrics(triples: &[(&Mat, &Mat, &Mat)]) -> Result<Metrics, MetricsError> {
    let mut tp = 0;
    let mut fp = 0;
    let mut tn = 0;
    let mut fn_ = 0;
    let mut all_scores = Vec::new();
    let mut all_labels = Vec::new();
    for (scores, pred, gold) in triples {
        let m = compute_metrics(scores, pred, gold)?;
        tp += m.tp;
        fp += m.fp;
        tn += m.tn;
        fn_ += m.fn_;
        all_scores.extend_from_slice(scores.data());
        all_labels.extend(gold.data().iter().map(|&g| g != 0.0));
    }
    let auc = if all_labels.is_empty() {
        0.5
    } else {
        roc_auc(&all_scores, &all_labels)
    };
    Ok(from_counts(tp, fp, tn, fn_, auc))
}
