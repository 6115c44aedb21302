//! Correspondence inference: the penalized alignment objective over a
//! continuous matrix X, its gradient, Adam-based optimization, discretization
//! to a one-to-one binary alignment, and candidate-inference extraction.

mod assignment;
mod candidates;
mod objective;
mod optimize;

pub use assignment::max_weight_assignment;
pub use candidates::{candidate_inferences, CandidateInference};
pub use objective::{objective, objective_grad, objective_with_options, ObjectiveOptions};
pub use optimize::optimize_alignment;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dag::DagError;
use crate::embed::EmbedError;
use crate::linalg::Mat;

#[derive(Debug, Error)]
pub enum InferError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("objective became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// Hyperparameters of the alignment optimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InferenceConfig {
    /// Weight of the depth (systematicity) term.
    pub lambda1: f64,
    /// Weight of the embedding-order term.
    pub lambda2: f64,
    /// Weight of the one-to-one orthogonality term.
    pub lambda3: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop early when the objective changes by less than this between
    /// iterations; zero disables early stopping.
    pub tolerance: f64,
    /// Decision threshold on sigmoid scores.
    pub tau: f64,
    pub seed: u64,
    /// Optimize X = sigmoid(Z) throughout instead of raw X with a final
    /// sigmoid.
    pub sigmoid_parameterization: bool,
    /// Ablation: replace the depth penalty by the raw reward -||X d||^2.
    pub depth_reward_raw: bool,
    /// Independent seeded runs; the one with the lowest final objective wins.
    /// The relaxation is non-convex, so a single descent can settle in a
    /// structurally coherent but mislabeled basin.
    pub restarts: usize,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            lambda1: 1e-3,
            lambda2: 1e-1,
            lambda3: 1e-3,
            learning_rate: 1e-3,
            max_iters: 2000,
            tolerance: 0.0,
            tau: 0.5,
            seed: 0,
            sigmoid_parameterization: false,
            depth_reward_raw: false,
            restarts: 1,
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<(), InferError> {
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 || self.lambda3 < 0.0 {
            return Err(InferError::Shape(
                "all lambda weights must be non-negative".into(),
            ));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(InferError::Shape("tau must lie in (0, 1)".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(InferError::Shape("learning rate must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(InferError::Shape("at least one restart is required".into()));
        }
        Ok(())
    }
}

/// The relaxed alignment: the optimized variable, its sigmoid scores, and the
/// objective trace.
#[derive(Debug, Clone)]
pub struct ContinuousAlignment {
    /// The optimized matrix (raw X, or the logits Z under sigmoid
    /// parameterization).
    pub raw: Mat,
    /// sigmoid(raw), entrywise in (0, 1).
    pub scores: Mat,
    pub objective: f64,
    pub iterations: usize,
    /// Objective value before each iteration plus the final value.
    pub trace: Vec<f64>,
}

/// Binary one-to-one alignment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentMatrix {
    mat: Mat,
}

impl AlignmentMatrix {
    /// Builds from 0/1 entries without enforcing one-to-one; use
    /// [`AlignmentMatrix::is_one_to_one`] to check.
    pub fn from_mat(mat: Mat) -> Self {
        debug_assert!(mat.data().iter().all(|&x| x == 0.0 || x == 1.0));
        AlignmentMatrix { mat }
    }

    pub fn from_pairs(base_n: usize, target_n: usize, pairs: &[(usize, usize)]) -> Self {
        let mut mat = Mat::zeros(base_n, target_n);
        for &(b, t) in pairs {
            mat.set(b, t, 1.0);
        }
        AlignmentMatrix { mat }
    }

    pub fn zeros(base_n: usize, target_n: usize) -> Self {
        AlignmentMatrix {
            mat: Mat::zeros(base_n, target_n),
        }
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn base_n(&self) -> usize {
        self.mat.rows()
    }

    pub fn target_n(&self) -> usize {
        self.mat.cols()
    }

    pub fn contains(&self, base: usize, target: usize) -> bool {
        self.mat.get(base, target) == 1.0
    }

    /// Matched (base, target) pairs sorted by base id.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.mat.rows() {
            for j in 0..self.mat.cols() {
                if self.mat.get(i, j) == 1.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// The target matched to `base`, if exactly one exists in that row.
    pub fn target_of(&self, base: usize) -> Option<usize> {
        let mut found = None;
        for j in 0..self.mat.cols() {
            if self.mat.get(base, j) == 1.0 {
                if found.is_some() {
                    return None;
                }
                found = Some(j);
            }
        }
        found
    }

    /// Every row and column sums to at most one.
    pub fn is_one_to_one(&self) -> bool {
        let row_ok = (0..self.mat.rows()).all(|i| self.mat.row(i).iter().sum::<f64>() <= 1.0);
        let col_ok = (0..self.mat.cols()).all(|j| {
            (0..self.mat.rows())
                .map(|i| self.mat.get(i, j))
                .sum::<f64>()
                <= 1.0
        });
        row_ok && col_ok
    }
}

/// Solves a maximum-weight one-to-one assignment on the scores, then zeroes
/// every assigned pair scoring below `tau`. The result always satisfies the
/// one-to-one constraint.
pub fn discretize(scores: &Mat, tau: f64) -> AlignmentMatrix {
    let assigned = max_weight_assignment(scores);
    let mut mat = Mat::zeros(scores.rows(), scores.cols());
    for (i, j) in assigned {
        if scores.get(i, j) >= tau {
            mat.set(i, j, 1.0);
        }
    }
    AlignmentMatrix { mat }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_identity_scores_discretize_to_identity() {
        let s = Mat::from_rows(vec![
            vec![0.9, 0.1, 0.1],
            vec![0.1, 0.9, 0.1],
            vec![0.1, 0.1, 0.9],
        ]);
        let x = discretize(&s, 0.5);
        assert_eq!(x.pairs(), vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn all_scores_below_tau_give_empty_alignment() {
        let s = Mat::from_rows(vec![vec![0.2, 0.3], vec![0.1, 0.4]]);
        let x = discretize(&s, 0.5);
        assert!(x.pairs().is_empty());
    }

    #[test]
    fn rectangular_random_scores_match_exhaustive_search() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let s = Mat::from_vec(3, 4, (0..12).map(|_| rng.gen_range(0.01..0.99)).collect());
            let got = discretize(&s, 1e-9);
            // Exhaustive oracle: every injection of the 3 rows into the 4
            // columns.
            let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        if a == b || b == c || a == c {
                            continue;
                        }
                        let pairs = vec![(0, a), (1, b), (2, c)];
                        let w: f64 = pairs.iter().map(|&(i, j)| s.get(i, j)).sum();
                        if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
                            best = Some((w, pairs));
                        }
                    }
                }
            }
            let (_, mut expected) = best.unwrap();
            expected.sort_unstable();
            assert_eq!(got.pairs(), expected);
        }
    }

    #[test]
    fn discretize_is_always_one_to_one() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for case in 0..30 {
            let rows = rng.gen_range(1..6);
            let cols = rng.gen_range(1..6);
            let s = Mat::from_vec(
                rows,
                cols,
                (0..rows * cols)
                    .map(|_| rng.gen_range(0.01..0.99))
                    .collect(),
            );
            let x = discretize(&s, 0.4);
            assert!(x.is_one_to_one(), "case {case}");
        }
    }
}
