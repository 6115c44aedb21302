//! Vertex-labeled DAG model for structure-mapping: node kinds, signatures,
//! positional argument edges, validation, structural queries, and the exact
//! rooted-subgraph test.
//!
//! Edges run from an expression to its arguments, so a relation node points
//! at the things it relates. Argument order is significant: the outgoing
//! edges of a node carry positions `0..arity-1`.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Mat;

/// What a node stands for. `Function` also covers attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Entity,
    Function,
    Relation,
}

impl NodeKind {
    /// Index into the 3-slot one-hot label block of a feature vector.
    pub fn one_hot_index(self) -> usize {
        match self {
            NodeKind::Entity => 0,
            NodeKind::Function => 1,
            NodeKind::Relation => 2,
        }
    }
}

/// A single expression node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmtNode {
    pub id: usize,
    pub kind: NodeKind,
    pub signature: String,
}

/// A positional edge from an expression to one of its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub pos: usize,
}

/// Vertex-labeled DAG with positional edges and cached adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct SmtDag {
    nodes: Vec<SmtNode>,
    edges: Vec<Edge>,
    /// Per node: outgoing `(pos, dst)` sorted by position.
    children: Vec<Vec<(usize, usize)>>,
    /// Per node: incoming source ids sorted ascending.
    parents: Vec<Vec<usize>>,
}

/// One reason a graph is not a well-formed SMT DAG.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("node {index} has id {found}, expected dense id {index}")]
    NonDenseId { index: usize, found: usize },
    #[error("node {node} has an empty signature")]
    EmptySignature { node: usize },
    #[error("edge {src}->{dst} references a node out of range")]
    EdgeOutOfRange { src: usize, dst: usize },
    #[error("edge {node}->{node} is a self-loop")]
    SelfLoop { node: usize },
    #[error("duplicate edge {src}->{dst} at position {pos}")]
    DuplicateEdge { src: usize, dst: usize, pos: usize },
    #[error("entity node {node} has outgoing edges")]
    EntityWithChildren { node: usize },
    #[error("node {node} has edge positions {found:?}, expected 0..{arity}")]
    BadPositions {
        node: usize,
        arity: usize,
        found: Vec<usize>,
    },
    #[error("graph contains a cycle through node {node}")]
    Cycle { node: usize },
}

/// Validation outcome: empty means the graph satisfies every invariant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DagError {
    #[error("graph is cyclic")]
    Cyclic,
    #[error("unknown root id {0}")]
    UnknownRoot(usize),
}

/// Longest-path-to-leaf height per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthVector {
    pub values: Vec<usize>,
}

impl DepthVector {
    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

/// Result of a rooted K-hop extraction.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub dag: SmtDag,
    /// Old id in the source graph -> new id in the extraction. The root maps to 0.
    pub id_map: BTreeMap<usize, usize>,
}

/// Knobs for the rooted-subgraph test.
#[derive(Debug, Clone, Copy)]
pub struct MatchOptions {
    /// When false, children of `Function` nodes may match in any order.
    pub ordered_functions: bool,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            ordered_functions: true,
        }
    }
}

impl SmtDag {
    /// Builds the graph and its adjacency caches. No validation happens here;
    /// call [`validate_dag`] to collect violations as data.
    pub fn new(nodes: Vec<SmtNode>, mut edges: Vec<Edge>) -> Self {
        let n = nodes.len();
        edges.sort_by_key(|e| (e.src, e.pos, e.dst));
        let mut children = vec![Vec::new(); n];
        let mut parents = vec![Vec::new(); n];
        for e in &edges {
            if e.src < n && e.dst < n {
                children[e.src].push((e.pos, e.dst));
                parents[e.dst].push(e.src);
            }
        }
        for p in &mut parents {
            p.sort_unstable();
            p.dedup();
        }
        SmtDag {
            nodes,
            edges,
            children,
            parents,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, id: usize) -> &SmtNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[SmtNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Outgoing `(pos, child)` pairs of `id`, sorted by position.
    pub fn children(&self, id: usize) -> &[(usize, usize)] {
        &self.children[id]
    }

    pub fn parents(&self, id: usize) -> &[usize] {
        &self.parents[id]
    }

    /// The child of `id` at argument position `pos`, if any.
    pub fn child_at(&self, id: usize, pos: usize) -> Option<usize> {
        self.children[id]
            .iter()
            .find(|&&(p, _)| p == pos)
            .map(|&(_, c)| c)
    }

    pub fn out_degree(&self, id: usize) -> usize {
        self.children[id].len()
    }

    /// Node ids in a deterministic topological order (parents before
    /// children), or the id of a node on a cycle.
    pub fn topological_order(&self) -> Result<Vec<usize>, DagError> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        for e in &self.edges {
            if e.dst < n {
                indegree[e.dst] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(_, c) in &self.children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        if order.len() != n {
            return Err(DagError::Cyclic);
        }
        Ok(order)
    }
}

/// Checks every structural invariant and reports all violations found.
/// Violations are data, not failures: an invalid graph yields a non-empty
/// report, never an error.
pub fn validate_dag(dag: &SmtDag) -> ValidationReport {
    let mut violations = Vec::new();
    let n = dag.nodes.len();

    for (index, node) in dag.nodes.iter().enumerate() {
        if node.id != index {
            violations.push(Violation::NonDenseId {
                index,
                found: node.id,
            });
        }
        if node.signature.is_empty() {
            violations.push(Violation::EmptySignature { node: index });
        }
    }

    let mut seen = std::collections::BTreeSet::new();
    for e in dag.edges() {
        if e.src >= n || e.dst >= n {
            violations.push(Violation::EdgeOutOfRange {
                src: e.src,
                dst: e.dst,
            });
            continue;
        }
        if e.src == e.dst {
            violations.push(Violation::SelfLoop { node: e.src });
        }
        if !seen.insert((e.src, e.dst, e.pos)) {
            violations.push(Violation::DuplicateEdge {
                src: e.src,
                dst: e.dst,
                pos: e.pos,
            });
        }
    }

    for id in 0..n {
        let arity = dag.children(id).len();
        if arity > 0 && dag.node(id).kind == NodeKind::Entity {
            violations.push(Violation::EntityWithChildren { node: id });
        }
        let mut positions: Vec<usize> = dag.children(id).iter().map(|&(p, _)| p).collect();
        positions.sort_unstable();
        if positions != (0..arity).collect::<Vec<_>>() {
            violations.push(Violation::BadPositions {
                node: id,
                arity,
                found: positions,
            });
        }
    }

    if let Err(DagError::Cyclic) = dag.topological_order() {
        // Identify one node still on a cycle for the report.
        let mut indegree = vec![0usize; n];
        for e in dag.edges() {
            if e.dst < n {
                indegree[e.dst] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut removed = vec![false; n];
        while let Some(v) = queue.pop_front() {
            removed[v] = true;
            for &(_, c) in dag.children(v) {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        if let Some(node) = (0..n).find(|&v| !removed[v]) {
            violations.push(Violation::Cycle { node });
        }
    }

    ValidationReport { violations }
}

/// Height of every node: longest path (in edges) down to any leaf, computed
/// in one reverse-topological pass.
pub fn node_heights(dag: &SmtDag) -> Result<DepthVector, DagError> {
    let order = dag.topological_order()?;
    let mut values = vec![0usize; dag.node_count()];
    for &v in order.iter().rev() {
        values[v] = dag
            .children(v)
            .iter()
            .map(|&(_, c)| values[c] + 1)
            .max()
            .unwrap_or(0);
    }
    Ok(DepthVector { values })
}

/// Extracts the rooted sub-DAG visible within `k` directed hops of `root`.
///
/// The node set is everything reachable from `root` in at most `k` hops;
/// edges are kept for every source node strictly inside the horizon, so a
/// node at distance exactly `k` keeps no arguments. Ids are re-densified in
/// BFS discovery order and the root becomes id 0.
pub fn k_hop_rooted_subgraph(dag: &SmtDag, root: usize, k: usize) -> Result<Extraction, DagError> {
    if root >= dag.node_count() {
        return Err(DagError::UnknownRoot(root));
    }
    let mut dist: BTreeMap<usize, usize> = BTreeMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    dist.insert(root, 0);
    queue.push_back(root);
    order.push(root);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if d == k {
            continue;
        }
        for &(_, c) in dag.children(v) {
            if let std::collections::btree_map::Entry::Vacant(slot) = dist.entry(c) {
                slot.insert(d + 1);
                order.push(c);
                queue.push_back(c);
            }
        }
    }

    let mut id_map = BTreeMap::new();
    for (new_id, &old_id) in order.iter().enumerate() {
        id_map.insert(old_id, new_id);
    }

    let nodes = order
        .iter()
        .enumerate()
        .map(|(new_id, &old_id)| {
            let src = dag.node(old_id);
            SmtNode {
                id: new_id,
                kind: src.kind,
                signature: src.signature.clone(),
            }
        })
        .collect();

    let mut edges = Vec::new();
    for &old_id in &order {
        if dist[&old_id] == k {
            continue;
        }
        for &(pos, c) in dag.children(old_id) {
            edges.push(Edge {
                src: id_map[&old_id],
                dst: id_map[&c],
                pos,
            });
        }
    }

    Ok(Extraction {
        dag: SmtDag::new(nodes, edges),
        id_map,
    })
}

/// All nodes reachable from `root` (including it), as an extraction with the
/// same id conventions as [`k_hop_rooted_subgraph`]. Every out-edge of every
/// included node is kept, so the result is an induced closed sub-DAG.
pub fn descendant_closure(dag: &SmtDag, root: usize) -> Result<Extraction, DagError> {
    k_hop_rooted_subgraph(dag, root, dag.node_count())
}

/// Relabels node ids so node `i` becomes `perm[i]`. `perm` must be a
/// permutation of `0..n`.
pub fn permute_ids(dag: &SmtDag, perm: &[usize]) -> SmtDag {
    assert_eq!(perm.len(), dag.node_count(), "permutation length mismatch");
    let mut nodes: Vec<SmtNode> = dag
        .nodes()
        .iter()
        .map(|n| SmtNode {
            id: perm[n.id],
            kind: n.kind,
            signature: n.signature.clone(),
        })
        .collect();
    nodes.sort_by_key(|n| n.id);
    let edges = dag
        .edges()
        .iter()
        .map(|e| Edge {
            src: perm[e.src],
            dst: perm[e.dst],
            pos: e.pos,
        })
        .collect();
    SmtDag::new(nodes, edges)
}

/// 0/1 adjacency matrix: entry `(i, j)` is 1 iff the edge `i -> j` exists.
/// Argument positions are ignored.
pub fn adjacency_matrix(dag: &SmtDag) -> Mat {
    let n = dag.node_count();
    let mut m = Mat::zeros(n, n);
    for e in dag.edges() {
        m.set(e.src, e.dst, 1.0);
    }
    m
}

/// Exact test: is there an injection from `small` into `big` mapping
/// `root_s` to `root_b`, preserving edges and argument positions, preserving
/// node kinds, and requiring identical signatures for relation nodes only?
///
/// Entity and function signatures are free to differ; relations must match
/// verbatim. With ordered matching the injection is forced by argument
/// positions; the unordered-function option falls back to backtracking over
/// child permutations of function nodes.
pub fn is_rooted_subgraph(
    small: &SmtDag,
    root_s: usize,
    big: &SmtDag,
    root_b: usize,
    opts: MatchOptions,
) -> bool {
    if root_s >= small.node_count() || root_b >= big.node_count() {
        return false;
    }
    let mut fwd: Vec<Option<usize>> = vec![None; small.node_count()];
    let mut rev: Vec<Option<usize>> = vec![None; big.node_count()];
    try_map(small, root_s, big, root_b, opts, &mut fwd, &mut rev)
}

fn compatible(small: &SmtDag, u: usize, big: &SmtDag, t: usize) -> bool {
    let a = small.node(u);
    let b = big.node(t);
    if a.kind != b.kind {
        return false;
    }
    a.kind != NodeKind::Relation || a.signature == b.signature
}

fn try_map(
    small: &SmtDag,
    u: usize,
    big: &SmtDag,
    t: usize,
    opts: MatchOptions,
    fwd: &mut Vec<Option<usize>>,
    rev: &mut Vec<Option<usize>>,
) -> bool {
    if let Some(mapped) = fwd[u] {
        return mapped == t;
    }
    if rev[t].is_some() || !compatible(small, u, big, t) {
        return false;
    }
    fwd[u] = Some(t);
    rev[t] = Some(u);

    let unordered = !opts.ordered_functions && small.node(u).kind == NodeKind::Function;
    let ok = if unordered {
        match_children_any_order(small, u, big, t, opts, fwd, rev)
    } else {
        small.children(u).iter().all(|&(pos, c)| {
            big.child_at(t, pos)
                .is_some_and(|tc| try_map(small, c, big, tc, opts, fwd, rev))
        })
    };

    if !ok {
        fwd[u] = None;
        rev[t] = None;
    }
    ok
}

fn match_children_any_order(
    small: &SmtDag,
    u: usize,
    big: &SmtDag,
    t: usize,
    opts: MatchOptions,
    fwd: &mut Vec<Option<usize>>,
    rev: &mut Vec<Option<usize>>,
) -> bool {
    #[allow(clippy::too_many_arguments)]
    fn assign(
        idx: usize,
        small: &SmtDag,
        u: usize,
        big: &SmtDag,
        t: usize,
        used: &mut Vec<bool>,
        opts: MatchOptions,
        fwd: &mut Vec<Option<usize>>,
        rev: &mut Vec<Option<usize>>,
    ) -> bool {
        if idx == small.children(u).len() {
            return true;
        }
        let (_, c) = small.children(u)[idx];
        for (slot, &(_, tc)) in big.children(t).iter().enumerate() {
            if used[slot] {
                continue;
            }
            let fwd_snapshot = fwd.clone();
            let rev_snapshot = rev.clone();
            used[slot] = true;
            if try_map(small, c, big, tc, opts, fwd, rev)
                && assign(idx + 1, small, u, big, t, used, opts, fwd, rev)
            {
                return true;
            }
            used[slot] = false;
            *fwd = fwd_snapshot;
            *rev = rev_snapshot;
        }
        false
    }

    let mut used = vec![false; big.children(t).len()];
    assign(0, small, u, big, t, &mut used, opts, fwd, rev)
}
