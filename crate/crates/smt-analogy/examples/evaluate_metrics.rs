//! Alignment-cell classification metrics on small hand-checked cases.

use smt_analogy::linalg::Mat;
use smt_analogy::metrics::{compute_metrics, roc_auc};

fn main() {
    // Scores rank one positive below one negative: 3 of 4 pairs concordant.
    let scores = Mat::from_vec(2, 2, vec![0.1, 0.4, 0.35, 0.8]);
    let gold = Mat::from_vec(2, 2, vec![0.0, 0.0, 1.0, 1.0]);
    let pred = Mat::from_vec(2, 2, vec![0.0, 0.0, 1.0, 1.0]);
    let m = compute_metrics(&scores, &pred, &gold).unwrap();
    println!(
        "ranked case: acc {:.2} re {:.2} pr {:.2} f1 {:.2} auc {:.2}",
        m.accuracy, m.recall, m.precision, m.f1, m.roc_auc
    );

    // A miss and a false alarm.
    let scores = Mat::from_vec(1, 4, vec![0.8, 0.6, 0.4, 0.2]);
    let pred = Mat::from_vec(1, 4, vec![1.0, 1.0, 0.0, 0.0]);
    let gold = Mat::from_vec(1, 4, vec![1.0, 0.0, 1.0, 0.0]);
    let m = compute_metrics(&scores, &pred, &gold).unwrap();
    println!(
        "balanced confusion: tp {} fp {} tn {} fn {} -> f1 {:.2}",
        m.tp, m.fp, m.tn, m.fn_, m.f1
    );

    // AUC ignores any monotone rescaling of the scores.
    let scores: [f64; 5] = [0.05, 0.3, 0.32, 0.9, 0.51];
    let labels = [false, true, false, true, true];
    let squashed: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp()).collect();
    println!(
        "auc {:.4} == auc after exp(3x) {:.4}",
        roc_auc(&scores, &labels),
        roc_auc(&squashed, &labels)
    );
}
