//! Candidate inferences: unmatched base expressions whose arguments are all
//! in correspondence, projected into the target as hypotheses.

use crate::dag::SmtDag;

use super::AlignmentMatrix;

/// One projectable base expression and the target nodes its arguments map to,
/// in argument order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateInference {
    pub base: usize,
    pub anchors: Vec<usize>,
}

/// Scans the base for unmatched nodes with a non-empty argument list whose
/// arguments are all matched, and reports each with its argument anchors.
pub fn candidate_inferences(base: &SmtDag, x: &AlignmentMatrix) -> Vec<CandidateInference> {
    let matched: Vec<Option<usize>> = (0..base.node_count()).map(|u| x.target_of(u)).collect();
    let mut out = Vec::new();
    for u in 0..base.node_count() {
        if matched[u].is_some() || base.children(u).is_empty() {
            continue;
        }
        let anchors: Option<Vec<usize>> =
            base.children(u).iter().map(|&(_, c)| matched[c]).collect();
        if let Some(anchors) = anchors {
            out.push(CandidateInference { base: u, anchors });
        }
    }
    out
}
