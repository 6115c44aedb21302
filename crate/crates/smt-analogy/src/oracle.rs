//! Exact structure mapping: rule-by-rule verification of alignments and a
//! backtracking search for maximal rule-consistent mappings, used as ground
//! truth at desk scale.
//!
//! A mapping is rule-consistent when matched expressions have all their
//! arguments matched position for position (parallel connectivity), no node
//! participates in two correspondences (one-to-one), and matched relations
//! carry identical signatures while entities and functions may differ
//! (tiered identicality). Among maximal mappings the best one maximizes the
//! correspondence count, then the systematicity score, then takes the
//! lexicographically smallest pair list.

use thiserror::Error;

use crate::dag::{node_heights, DagError, NodeKind, SmtDag};
use crate::infer::AlignmentMatrix;
use crate::vocab::SignatureVocab;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("instance size {base}x{target} exceeds search limits {max_base}x{max_target}")]
    SizeExceeded {
        base: usize,
        target: usize,
        max_base: usize,
        max_target: usize,
    },
    #[error(transparent)]
    Dag(#[from] DagError),
}

/// Which graph a rule violation points into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Base,
    Target,
}

/// Per-rule verification outcome. Each boolean is true iff its violation
/// list is empty.
#[derive(Debug, Clone)]
pub struct RuleReport {
    pub parallel_connectivity: bool,
    pub parallel_violations: Vec<(usize, usize)>,
    pub one_to_one: bool,
    pub one_to_one_violations: Vec<(Side, usize)>,
    pub tiered_identicality: bool,
    pub identicality_violations: Vec<(usize, usize)>,
    pub systematicity_score: f64,
    pub correspondence_count: usize,
}

impl RuleReport {
    pub fn all_rules_pass(&self) -> bool {
        self.parallel_connectivity && self.one_to_one && self.tiered_identicality
    }
}

/// Sum over matched target nodes of (1 + height), the depth-weighted size of
/// a mapping. Monotone under extension.
pub fn systematicity_score(target: &SmtDag, mapping: &[(usize, usize)]) -> f64 {
    let heights = match node_heights(target) {
        Ok(h) => h,
        Err(_) => return 0.0,
    };
    mapping
        .iter()
        .map(|&(_, t)| 1.0 + heights.values[t] as f64)
        .sum()
}

/// Checks every structure-mapping rule on a binary alignment.
pub fn verify_alignment(
    base: &SmtDag,
    target: &SmtDag,
    x: &AlignmentMatrix,
) -> Result<RuleReport, OracleError> {
    if x.base_n() != base.node_count() || x.target_n() != target.node_count() {
        return Err(OracleError::Shape(format!(
            "alignment is {}x{}, instance is {}x{}",
            x.base_n(),
            x.target_n(),
            base.node_count(),
            target.node_count()
        )));
    }
    let pairs = x.pairs();

    let mut one_to_one_violations = Vec::new();
    for u in 0..base.node_count() {
        let row: f64 = x.mat().row(u).iter().sum();
        if row > 1.0 {
            one_to_one_violations.push((Side::Base, u));
        }
    }
    for t in 0..target.node_count() {
        let col: f64 = (0..base.node_count()).map(|u| x.mat().get(u, t)).sum();
        if col > 1.0 {
            one_to_one_violations.push((Side::Target, t));
        }
    }

    let mut parallel_violations = Vec::new();
    let mut identicality_violations = Vec::new();
    for &(u, t) in &pairs {
        let bn = base.node(u);
        let tn = target.node(t);
        if bn.kind != tn.kind || (bn.kind == NodeKind::Relation && bn.signature != tn.signature) {
            identicality_violations.push((u, t));
        }
        let connected = base
            .children(u)
            .iter()
            .all(|&(pos, c)| target.child_at(t, pos).is_some_and(|tc| x.contains(c, tc)));
        if !connected {
            parallel_violations.push((u, t));
        }
    }

    let systematicity = systematicity_score(target, &pairs);
    Ok(RuleReport {
        parallel_connectivity: parallel_violations.is_empty(),
        parallel_violations,
        one_to_one: one_to_one_violations.is_empty(),
        one_to_one_violations,
        tiered_identicality: identicality_violations.is_empty(),
        identicality_violations,
        systematicity_score: systematicity,
        correspondence_count: pairs.len(),
    })
}

/// Search bounds for the exact mapper.
#[derive(Debug, Clone, Copy)]
pub struct SearchLimits {
    pub max_base_nodes: usize,
    pub max_target_nodes: usize,
    /// Cap on the number of maximal mappings collected; the best mapping is
    /// exact regardless.
    pub max_mappings: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_base_nodes: 12,
            max_target_nodes: 40,
            max_mappings: 10_000,
        }
    }
}

/// Signature handling for entity and function matches.
#[derive(Debug, Clone, Copy, Default)]
pub struct MatchPolicy<'a> {
    /// When set, entity and function correspondences must stay within one
    /// synonym group of this vocabulary.
    pub strict_synonym_vocab: Option<&'a SignatureVocab>,
}

/// Search outcome: the exact best mapping plus every maximal mapping found
/// (up to the collection cap).
#[derive(Debug, Clone)]
pub struct StructureMapResult {
    /// Pairs sorted by base id.
    pub best: Vec<(usize, usize)>,
    pub maximal: Vec<Vec<(usize, usize)>>,
    /// True when the maximal list hit the collection cap.
    pub truncated: bool,
}

/// (correspondence count, systematicity score, sorted pairs).
type RankedMapping = (usize, f64, Vec<(usize, usize)>);

struct Search<'a> {
    base: &'a SmtDag,
    target: &'a SmtDag,
    order: Vec<usize>,
    candidates: Vec<Vec<usize>>,
    target_heights: Vec<usize>,
    mapping: Vec<Option<usize>>,
    used: Vec<bool>,
    best: Option<RankedMapping>,
    maximal: Vec<Vec<(usize, usize)>>,
    truncated: bool,
    max_mappings: usize,
}

impl<'a> Search<'a> {
    /// A node can take `t` when its kind and signature allow it and every
    /// argument is already matched to the corresponding argument of `t`.
    fn consistent(&self, u: usize, t: usize) -> bool {
        if self.used[t] {
            return false;
        }
        self.base
            .children(u)
            .iter()
            .all(|&(pos, c)| match self.mapping[c] {
                Some(tc) => self.target.child_at(t, pos) == Some(tc),
                None => false,
            })
    }

    fn recurse(&mut self, index: usize) {
        if index == self.order.len() {
            self.visit_leaf();
            return;
        }
        let u = self.order[index];
        let all_children_matched = self
            .base
            .children(u)
            .iter()
            .all(|&(_, c)| self.mapping[c].is_some());
        if all_children_matched {
            let cands = self.candidates[u].clone();
            for t in cands {
                if self.consistent(u, t) {
                    self.mapping[u] = Some(t);
                    self.used[t] = true;
                    self.recurse(index + 1);
                    self.mapping[u] = None;
                    self.used[t] = false;
                }
            }
        }
        self.recurse(index + 1);
    }

    fn visit_leaf(&mut self) {
        // Maximality: no single unmatched node can be added consistently.
        for u in 0..self.base.node_count() {
            if self.mapping[u].is_some() {
                continue;
            }
            let extendable = self
                .base
                .children(u)
                .iter()
                .all(|&(_, c)| self.mapping[c].is_some())
                && self.candidates[u].iter().any(|&t| self.consistent(u, t));
            if extendable {
                return;
            }
        }

        let mut pairs: Vec<(usize, usize)> = self
            .mapping
            .iter()
            .enumerate()
            .filter_map(|(u, t)| t.map(|t| (u, t)))
            .collect();
        pairs.sort_unstable();
        let count = pairs.len();
        let score: f64 = pairs
            .iter()
            .map(|&(_, t)| 1.0 + self.target_heights[t] as f64)
            .sum();

        let better = match &self.best {
            None => true,
            Some((bc, bs, bp)) => {
                count > *bc
                    || (count == *bc && score > *bs)
                    || (count == *bc && score == *bs && pairs < *bp)
            }
        };
        if better {
            self.best = Some((count, score, pairs.clone()));
        }
        if self.maximal.len() < self.max_mappings {
            self.maximal.push(pairs);
        } else {
            self.truncated = true;
        }
    }
}

/// Exhaustive backtracking over base nodes in an argument-first order,
/// returning the exact best mapping and all maximal mappings within limits.
pub fn exact_structure_map(
    base: &SmtDag,
    target: &SmtDag,
    limits: SearchLimits,
) -> Result<StructureMapResult, OracleError> {
    exact_structure_map_with_policy(base, target, limits, MatchPolicy::default())
}

pub fn exact_structure_map_with_policy(
    base: &SmtDag,
    target: &SmtDag,
    limits: SearchLimits,
    policy: MatchPolicy<'_>,
) -> Result<StructureMapResult, OracleError> {
    if base.node_count() > limits.max_base_nodes || target.node_count() > limits.max_target_nodes {
        return Err(OracleError::SizeExceeded {
            base: base.node_count(),
            target: target.node_count(),
            max_base: limits.max_base_nodes,
            max_target: limits.max_target_nodes,
        });
    }
    let target_heights = node_heights(target)?;
    base.topological_order()?;

    // Arguments before the expressions that use them, grouped subtree by
    // subtree so structural contradictions surface early.
    let order = post_order(base);

    let compatible = |u: usize, t: usize| -> bool {
        let bn = base.node(u);
        let tn = target.node(t);
        if bn.kind != tn.kind {
            return false;
        }
        match bn.kind {
            NodeKind::Relation => bn.signature == tn.signature,
            _ => match policy.strict_synonym_vocab {
                Some(vocab) => vocab.same_group(&bn.signature, &tn.signature),
                None => true,
            },
        }
    };
    let candidates: Vec<Vec<usize>> = (0..base.node_count())
        .map(|u| {
            (0..target.node_count())
                .filter(|&t| compatible(u, t))
                .collect()
        })
        .collect();

    let mut search = Search {
        base,
        target,
        order,
        candidates,
        target_heights: target_heights.values,
        mapping: vec![None; base.node_count()],
        used: vec![false; target.node_count()],
        best: None,
        maximal: Vec::new(),
        truncated: false,
        max_mappings: limits.max_mappings,
    };
    search.recurse(0);

    let best = search.best.map(|(_, _, pairs)| pairs).unwrap_or_default();
    Ok(StructureMapResult {
        best,
        maximal: search.maximal,
        truncated: search.truncated,
    })
}

/// Post-order DFS from every parentless node, children in argument order.
fn post_order(dag: &SmtDag) -> Vec<usize> {
    let n = dag.node_count();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    fn visit(dag: &SmtDag, v: usize, visited: &mut [bool], order: &mut Vec<usize>) {
        if visited[v] {
            return;
        }
        visited[v] = true;
        for &(_, c) in dag.children(v) {
            visit(dag, c, visited, order);
        }
        order.push(v);
    }
    for v in 0..n {
        if dag.parents(v).is_empty() {
            visit(dag, v, &mut visited, &mut order);
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{atom_id, rutherford_atom, solar_id, solar_system};
    use crate::synth::{sample_analogy_pair, GenParams};

    fn alignment(base: &SmtDag, target: &SmtDag, pairs: &[(usize, usize)]) -> AlignmentMatrix {
        AlignmentMatrix::from_pairs(base.node_count(), target.node_count(), pairs)
    }

    #[test]
    fn restricted_textbook_mapping_passes_every_rule() {
        let base = rutherford_atom();
        let target = solar_system();
        let x = alignment(
            &base,
            &target,
            &[
                (atom_id(9), solar_id(18)),
                (atom_id(3), solar_id(12)),
                (atom_id(4), solar_id(13)),
            ],
        );
        let report = verify_alignment(&base, &target, &x).unwrap();
        assert!(report.all_rules_pass(), "{report:?}");
        assert_eq!(report.correspondence_count, 3);
    }

    #[test]
    fn double_match_breaks_one_to_one() {
        let base = rutherford_atom();
        let target = solar_system();
        let x = alignment(
            &base,
            &target,
            &[(atom_id(1), solar_id(10)), (atom_id(1), solar_id(11))],
        );
        let report = verify_alignment(&base, &target, &x).unwrap();
        assert!(!report.one_to_one);
        assert_eq!(report.one_to_one_violations, vec![(Side::Base, atom_id(1))]);
    }

    #[test]
    fn relation_signature_mismatch_breaks_identicality() {
        let base = rutherford_atom();
        let target = solar_system();
        // attracts vs cause: same kind, different signature.
        let x = alignment(&base, &target, &[(atom_id(5), solar_id(20))]);
        let report = verify_alignment(&base, &target, &x).unwrap();
        assert!(!report.tiered_identicality);
    }

    #[test]
    fn matched_parent_with_unmatched_child_breaks_connectivity() {
        let base = rutherford_atom();
        let target = solar_system();
        let x = alignment(&base, &target, &[(atom_id(9), solar_id(18))]);
        let report = verify_alignment(&base, &target, &x).unwrap();
        assert!(!report.parallel_connectivity);
        assert_eq!(report.parallel_violations, vec![(atom_id(9), solar_id(18))]);
    }

    #[test]
    fn self_mapping_is_a_full_bijection() {
        let base = rutherford_atom();
        let result = exact_structure_map(&base, &base, SearchLimits::default()).unwrap();
        assert_eq!(result.best.len(), base.node_count());
    }

    #[test]
    fn textbook_best_mapping_prefers_the_supported_greater() {
        let base = rutherford_atom();
        let target = solar_system();
        let result = exact_structure_map(&base, &target, SearchLimits::default()).unwrap();
        let expected_subset = [
            (atom_id(1), solar_id(10)),
            (atom_id(2), solar_id(11)),
            (atom_id(3), solar_id(12)),
            (atom_id(4), solar_id(13)),
            (atom_id(9), solar_id(18)),
        ];
        for pair in expected_subset {
            assert!(
                result.best.contains(&pair),
                "missing {pair:?} in {:?}",
                result.best
            );
        }
        assert!(!result.best.contains(&(atom_id(9), solar_id(19))));
        assert_eq!(result.best.len(), 8);
    }

    #[test]
    fn every_returned_mapping_passes_verification() {
        let base = rutherford_atom();
        let target = solar_system();
        let result = exact_structure_map(&base, &target, SearchLimits::default()).unwrap();
        for mapping in result.maximal.iter().chain(std::iter::once(&result.best)) {
            let x = alignment(&base, &target, mapping);
            let report = verify_alignment(&base, &target, &x).unwrap();
            assert!(report.all_rules_pass());
        }
    }

    #[test]
    fn planted_instances_recover_their_gold_size() {
        let vocab = crate::vocab::SignatureVocab::builtin(7);
        let mut params = GenParams::new(vocab);
        params.depth_range = (2, 3);
        params.branching = (1, 2);
        params.max_nodes = 20;
        params.distractor = 0.0;
        params.relabel = 0.0;
        let mut checked = 0;
        for seed in 0..60u64 {
            let inst = sample_analogy_pair(&params, seed).unwrap();
            if inst.base.node_count() > 8 {
                continue;
            }
            let result =
                exact_structure_map(&inst.base, &inst.target, SearchLimits::default()).unwrap();
            let gold = inst.gold.unwrap();
            // The gold injection is rule-consistent and complete, so the
            // best mapping can never be smaller.
            assert!(result.best.len() >= gold.len(), "seed {seed}");
            checked += 1;
        }
        assert!(checked > 20);
    }

    #[test]
    fn strict_synonym_policy_keeps_only_within_group_matches() {
        let vocab = crate::vocab::SignatureVocab::builtin(7);
        let base = rutherford_atom();
        let target = solar_system();
        let strict = MatchPolicy {
            strict_synonym_vocab: Some(&vocab),
        };
        let result =
            exact_structure_map_with_policy(&base, &target, SearchLimits::default(), strict)
                .unwrap();
        // nucleus/sun and electron/planet cross synonym groups, so the whole
        // entity-anchored structure drops out; what survives is the greater
        // comparison over mass/weight (one group) and mass/mass.
        assert_eq!(
            result.best,
            vec![
                (atom_id(3), solar_id(12)),
                (atom_id(4), solar_id(13)),
                (atom_id(9), solar_id(18)),
            ]
        );
        // And no maximal mapping pairs mass with temperature.
        for mapping in &result.maximal {
            assert!(!mapping.contains(&(atom_id(3), solar_id(14))));
            assert!(!mapping.contains(&(atom_id(3), solar_id(15))));
        }
    }

    #[test]
    fn size_limits_are_enforced() {
        let base = rutherford_atom();
        let limits = SearchLimits {
            max_base_nodes: 3,
            ..SearchLimits::default()
        };
        assert!(matches!(
            exact_structure_map(&base, &base, limits),
            Err(OracleError::SizeExceeded { .. })
        ));
    }

    #[test]
    fn search_is_deterministic() {
        let base = rutherford_atom();
        let target = solar_system();
        let a = exact_structure_map(&base, &target, SearchLimits::default()).unwrap();
        let b = exact_structure_map(&base, &target, SearchLimits::default()).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.maximal, b.maximal);
    }

    #[test]
    fn systematicity_examples() {
        let target = solar_system();
        assert_eq!(systematicity_score(&target, &[]), 0.0);
        // A single matched leaf counts 1.
        assert_eq!(systematicity_score(&target, &[(0, solar_id(10))]), 1.0);

        // Full 3-chain: heights 2, 1, 0 give (1+2) + (1+1) + (1+0) = 6.
        let chain = SmtDag::new(
            vec![
                crate::dag::SmtNode {
                    id: 0,
                    kind: NodeKind::Relation,
                    signature: "cause".into(),
                },
                crate::dag::SmtNode {
                    id: 1,
                    kind: NodeKind::Function,
                    signature: "mass".into(),
                },
                crate::dag::SmtNode {
                    id: 2,
                    kind: NodeKind::Entity,
                    signature: "sun".into(),
                },
            ],
            vec![
                crate::dag::Edge {
                    src: 0,
                    dst: 1,
                    pos: 0,
                },
                crate::dag::Edge {
                    src: 1,
                    dst: 2,
                    pos: 0,
                },
            ],
        );
        assert_eq!(systematicity_score(&chain, &[(0, 0), (1, 1), (2, 2)]), 6.0);
    }

    #[test]
    fn maximality_holds_under_single_extension() {
        let base = rutherford_atom();
        let target = solar_system();
        let result = exact_structure_map(&base, &target, SearchLimits::default()).unwrap();
        for mapping in &result.maximal {
            let matched_base: Vec<usize> = mapping.iter().map(|&(u, _)| u).collect();
            let used_target: Vec<usize> = mapping.iter().map(|&(_, t)| t).collect();
            for u in 0..base.node_count() {
                if matched_base.contains(&u) {
                    continue;
                }
                for t in 0..target.node_count() {
                    if used_target.contains(&t) {
                        continue;
                    }
                    // Extending by (u, t) must violate some rule.
                    let mut extended = mapping.clone();
                    extended.push((u, t));
                    let x = alignment(&base, &target, &extended);
                    let report = verify_alignment(&base, &target, &x).unwrap();
                    assert!(
                        !report.all_rules_pass(),
                        "mapping {mapping:?} extendable by ({u}, {t})"
                    );
                }
            }
        }
    }
}
