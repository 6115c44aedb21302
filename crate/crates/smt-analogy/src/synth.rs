//! Synthetic corpus generation: random SMT DAGs, planted analogy pairs with
//! gold alignments, and order-pair sampling for encoder training.
//!
//! Everything is a pure function of `(params, seed)`, so callers can fan
//! instance generation out across workers by deriving one seed per instance.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dag::{
    descendant_closure, is_rooted_subgraph, k_hop_rooted_subgraph, node_heights, permute_ids, Edge,
    MatchOptions, NodeKind, SmtDag, SmtNode,
};
use crate::vocab::SignatureVocab;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("node-count cap {cap} exceeded after {attempts} attempts")]
    NodeCapExceeded { cap: usize, attempts: usize },
    #[error("could not produce a verified {kind} pair after {attempts} attempts")]
    InsufficientCorpus { kind: &'static str, attempts: usize },
}

/// Parameters for the synthetic DAG generator and pair sampler.
#[derive(Debug, Clone)]
pub struct GenParams {
    /// Inclusive range of target heights, each within [1, 10].
    pub depth_range: (usize, usize),
    /// Inclusive range of child counts for internal nodes.
    pub branching: (usize, usize),
    /// Hard cap on nodes per generated graph.
    pub max_nodes: usize,
    pub vocab: SignatureVocab,
    /// Extra target structure relative to the core size, grown outside the
    /// planted base correspondence.
    pub distractor: f64,
    /// Probability of swapping a non-relation base signature for a synonym.
    pub relabel: f64,
    /// Base seed used by corpus-level helpers to derive per-instance seeds.
    pub seed: u64,
}

impl GenParams {
    pub fn new(vocab: SignatureVocab) -> Self {
        GenParams {
            depth_range: (2, 7),
            branching: (1, 3),
            max_nodes: 200,
            vocab,
            distractor: 0.3,
            relabel: 0.5,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let (dmin, dmax) = self.depth_range;
        if dmin < 1 || dmax > 10 || dmin > dmax {
            return Err(GenError::InvalidParams(format!(
                "depth range [{dmin}, {dmax}] must be non-empty and within [1, 10]"
            )));
        }
        let (bmin, bmax) = self.branching;
        if bmin < 1 || bmin > bmax {
            return Err(GenError::InvalidParams(format!(
                "branching range [{bmin}, {bmax}] must be non-empty and at least 1"
            )));
        }
        if self.max_nodes < 2 {
            return Err(GenError::InvalidParams(
                "node cap must allow at least 2 nodes".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.relabel) || self.distractor < 0.0 {
            return Err(GenError::InvalidParams(
                "relabel must be in [0,1] and distractor non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// A base/target pair with an optional gold alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyInstance {
    pub id: String,
    pub base: SmtDag,
    pub target: SmtDag,
    /// Planted or oracle-computed (base id, target id) correspondences,
    /// one-to-one in both coordinates.
    pub gold: Option<Vec<(usize, usize)>>,
}

/// A training example for the order-embedding loss.
#[derive(Debug, Clone)]
pub struct OrderPair {
    pub query: SmtDag,
    pub query_root: usize,
    pub anchor: SmtDag,
    pub anchor_root: usize,
    /// True iff `query` is a rooted subgraph of `anchor` at the given roots.
    pub positive: bool,
}

pub(crate) fn splitmix(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Token pools derived from the vocabulary: singleton groups act as relation
/// vocabulary, multi-token groups as entity/function concepts. Either pool
/// falls back to the full token list when empty.
struct TokenPools<'a> {
    relations: Vec<&'a str>,
    concepts: Vec<&'a str>,
}

impl<'a> TokenPools<'a> {
    fn new(vocab: &'a SignatureVocab) -> Self {
        let mut relations = Vec::new();
        let mut concepts = Vec::new();
        for group in vocab.groups() {
            let bucket = if group.len() == 1 {
                &mut relations
            } else {
                &mut concepts
            };
            bucket.extend(group.iter().map(String::as_str));
        }
        let all: Vec<&str> = vocab
            .groups()
            .iter()
            .flat_map(|g| g.iter().map(String::as_str))
            .collect();
        if relations.is_empty() {
            relations = all.clone();
        }
        if concepts.is_empty() {
            concepts = all;
        }
        TokenPools {
            relations,
            concepts,
        }
    }

    fn pick(&self, kind: NodeKind, rng: &mut ChaCha8Rng) -> String {
        let pool = match kind {
            NodeKind::Relation => &self.relations,
            _ => &self.concepts,
        };
        pool[rng.gen_range(0..pool.len())].to_string()
    }
}

struct Grower<'a> {
    pools: TokenPools<'a>,
    nodes: Vec<SmtNode>,
    edges: Vec<Edge>,
    cap: usize,
}

impl<'a> Grower<'a> {
    /// Grows a subtree of exactly `height` and returns its root id, or None
    /// when the node cap would be exceeded.
    fn grow(
        &mut self,
        height: usize,
        branching: (usize, usize),
        rng: &mut ChaCha8Rng,
    ) -> Option<usize> {
        if self.nodes.len() >= self.cap {
            return None;
        }
        let id = self.nodes.len();
        let kind = if height == 0 {
            NodeKind::Entity
        } else if rng.gen_bool(0.5) {
            NodeKind::Relation
        } else {
            NodeKind::Function
        };
        let signature = self.pools.pick(kind, rng);
        self.nodes.push(SmtNode {
            id,
            kind,
            signature,
        });
        if height == 0 {
            return Some(id);
        }
        let arity = rng.gen_range(branching.0..=branching.1);
        // One argument carries the full remaining height so the subtree
        // height is exact; the rest sample anything shallower.
        let spine = rng.gen_range(0..arity);
        for pos in 0..arity {
            let child_height = if pos == spine {
                height - 1
            } else {
                rng.gen_range(0..height)
            };
            let child = self.grow(child_height, branching, rng)?;
            self.edges.push(Edge {
                src: id,
                dst: child,
                pos,
            });
        }
        Some(id)
    }
}

/// Generates one random SMT DAG. The height is sampled uniformly from the
/// depth range; leaves are entities; internal nodes are relations or
/// functions with equal probability. Deterministic in `(params, seed)`.
pub fn generate_dag(params: &GenParams, seed: u64) -> Result<SmtDag, GenError> {
    params.validate()?;
    let mut height_rng = ChaCha8Rng::seed_from_u64(splitmix(seed, 0));
    let height = height_rng.gen_range(params.depth_range.0..=params.depth_range.1);

    let attempts = 10;
    for attempt in 0..attempts {
        // Tighten the branching ceiling on every retry.
        let bmax = params
            .branching
            .1
            .saturating_sub(attempt)
            .max(params.branching.0);
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed, 1 + attempt as u64));
        let mut grower = Grower {
            pools: TokenPools::new(&params.vocab),
            nodes: Vec::new(),
            edges: Vec::new(),
            cap: params.max_nodes,
        };
        if grower
            .grow(height, (params.branching.0, bmax), &mut rng)
            .is_some()
        {
            return Ok(SmtDag::new(grower.nodes, grower.edges));
        }
    }
    Err(GenError::NodeCapExceeded {
        cap: params.max_nodes,
        attempts,
    })
}

/// Grows distractor subtrees onto non-entity nodes of `target` until about
/// `fraction * core_size` extra nodes exist.
fn add_distractors(
    target: &SmtDag,
    fraction: f64,
    pools: &TokenPools,
    rng: &mut ChaCha8Rng,
) -> SmtDag {
    let core_size = target.node_count();
    let budget = (fraction * core_size as f64).ceil() as usize;
    if budget == 0 {
        return target.clone();
    }
    let mut nodes = target.nodes().to_vec();
    let mut edges = target.edges().to_vec();
    let mut out_degree: Vec<usize> = (0..core_size).map(|v| target.out_degree(v)).collect();

    let mut added = 0;
    while added < budget {
        let internal: Vec<usize> = nodes
            .iter()
            .filter(|n| n.kind != NodeKind::Entity)
            .map(|n| n.id)
            .collect();
        let attach = internal[rng.gen_range(0..internal.len())];
        let height = rng.gen_range(0..=2usize.min(budget - added));
        added += grow_branch(
            &mut nodes,
            &mut edges,
            &mut out_degree,
            attach,
            height,
            pools,
            rng,
        );
    }
    SmtDag::new(nodes, edges)
}

/// Appends one subtree of the given height under `attach` and returns how
/// many nodes it added.
fn grow_branch(
    nodes: &mut Vec<SmtNode>,
    edges: &mut Vec<Edge>,
    out_degree: &mut Vec<usize>,
    attach: usize,
    height: usize,
    pools: &TokenPools,
    rng: &mut ChaCha8Rng,
) -> usize {
    let before = nodes.len();
    let root = grow_fresh(nodes, edges, out_degree, height, pools, rng);
    edges.push(Edge {
        src: attach,
        dst: root,
        pos: out_degree[attach],
    });
    out_degree[attach] += 1;
    nodes.len() - before
}

fn grow_fresh(
    nodes: &mut Vec<SmtNode>,
    edges: &mut Vec<Edge>,
    out_degree: &mut Vec<usize>,
    height: usize,
    pools: &TokenPools,
    rng: &mut ChaCha8Rng,
) -> usize {
    let id = nodes.len();
    let kind = if height == 0 {
        NodeKind::Entity
    } else if rng.gen_bool(0.5) {
        NodeKind::Relation
    } else {
        NodeKind::Function
    };
    nodes.push(SmtNode {
        id,
        kind,
        signature: pools.pick(kind, rng),
    });
    out_degree.push(0);
    if height == 0 {
        return id;
    }
    let arity = rng.gen_range(1..=2usize);
    for pos in 0..arity {
        let child_height = if pos == 0 {
            height - 1
        } else {
            rng.gen_range(0..height)
        };
        let child = grow_fresh(nodes, edges, out_degree, child_height, pools, rng);
        edges.push(Edge {
            src: id,
            dst: child,
            pos,
        });
        out_degree[id] += 1;
    }
    id
}

/// Samples one planted analogy instance: the target is a generated DAG plus
/// distractor branches; the base is the descendant closure of a random
/// non-leaf target node with permuted ids and optional synonym relabeling of
/// non-relation signatures. The gold alignment records the planted injection.
pub fn sample_analogy_pair(params: &GenParams, seed: u64) -> Result<AnalogyInstance, GenError> {
    params.validate()?;
    let core = generate_dag(params, splitmix(seed, 100))?;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed, 101));

    let heights = node_heights(&core).expect("generated graphs are acyclic");
    let roots: Vec<usize> = (0..core.node_count())
        .filter(|&v| heights.values[v] >= 1)
        .collect();
    let base_root = roots[rng.gen_range(0..roots.len())];

    let closure = descendant_closure(&core, base_root).expect("root exists");
    let pools = TokenPools::new(&params.vocab);
    let target = add_distractors(&core, params.distractor, &pools, &mut rng);

    let n_base = closure.dag.node_count();
    let mut perm: Vec<usize> = (0..n_base).collect();
    perm.shuffle(&mut rng);
    let mut base = permute_ids(&closure.dag, &perm);

    let mut gold: Vec<(usize, usize)> = closure
        .id_map
        .iter()
        .map(|(&core_id, &bfs_id)| (perm[bfs_id], core_id))
        .collect();
    gold.sort_unstable();

    if params.relabel > 0.0 {
        let mut nodes = base.nodes().to_vec();
        for node in &mut nodes {
            if node.kind == NodeKind::Relation {
                continue;
            }
            if rng.gen_bool(params.relabel) {
                let synonyms = params.vocab.synonyms(&node.signature);
                if !synonyms.is_empty() {
                    node.signature = synonyms[rng.gen_range(0..synonyms.len())].to_string();
                }
            }
        }
        base = SmtDag::new(nodes, base.edges().to_vec());
    }

    Ok(AnalogyInstance {
        id: format!("inst-{seed}"),
        base,
        target,
        gold: Some(gold),
    })
}

/// Drops trailing arguments at random nodes and rebuilds the graph reachable
/// from the root. Half the time a single argument subtree is removed (the
/// scale of one distractor branch); otherwise several nodes lose a random
/// suffix. The result is always a rooted subgraph of the original query.
fn prune_query(query: &SmtDag, rng: &mut ChaCha8Rng) -> SmtDag {
    let mut kept_edges: Vec<Edge> = Vec::new();
    let single_drop = rng.gen_bool(0.5);
    let branchy: Vec<usize> = (0..query.node_count())
        .filter(|&v| query.out_degree(v) >= 1)
        .collect();
    let drop_at = if single_drop && !branchy.is_empty() {
        Some(branchy[rng.gen_range(0..branchy.len())])
    } else {
        None
    };
    for v in 0..query.node_count() {
        let arity = query.out_degree(v);
        if arity == 0 {
            continue;
        }
        let keep = match drop_at {
            Some(node) if node == v => arity - 1,
            Some(_) => arity,
            None => {
                if rng.gen_bool(0.5) {
                    rng.gen_range(0..=arity)
                } else {
                    arity
                }
            }
        };
        for &(pos, c) in query.children(v).iter().take(keep) {
            kept_edges.push(Edge {
                src: v,
                dst: c,
                pos,
            });
        }
    }
    rebuild_from_root(query, &kept_edges)
}

/// Re-densifies the subgraph of `source` reachable from node 0 over `edges`.
fn rebuild_from_root(source: &SmtDag, edges: &[Edge]) -> SmtDag {
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); source.node_count()];
    for e in edges {
        children[e.src].push((e.pos, e.dst));
    }
    let mut order = vec![0usize];
    let mut seen = vec![false; source.node_count()];
    seen[0] = true;
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &(_, c) in &children[v] {
            if !seen[c] {
                seen[c] = true;
                order.push(c);
            }
        }
    }
    let mut new_id = vec![usize::MAX; source.node_count()];
    for (i, &old) in order.iter().enumerate() {
        new_id[old] = i;
    }
    let nodes = order
        .iter()
        .enumerate()
        .map(|(i, &old)| SmtNode {
            id: i,
            kind: source.node(old).kind,
            signature: source.node(old).signature.clone(),
        })
        .collect();
    let new_edges = edges
        .iter()
        .filter(|e| seen[e.src])
        .map(|e| Edge {
            src: new_id[e.src],
            dst: new_id[e.dst],
            pos: e.pos,
        })
        .collect();
    SmtDag::new(nodes, new_edges)
}

/// Ancestors of every node (transitive parents), used to keep edge
/// perturbations acyclic.
fn ancestor_sets(dag: &SmtDag) -> Vec<Vec<bool>> {
    let order = dag.topological_order().expect("queries are acyclic");
    let n = dag.node_count();
    let mut anc = vec![vec![false; n]; n];
    for &v in &order {
        for p in dag.parents(v).to_vec() {
            anc[v][p] = true;
            let parent_anc = anc[p].clone();
            for (slot, is_anc) in anc[v].iter_mut().zip(parent_anc) {
                *slot |= is_anc;
            }
        }
    }
    anc
}

/// Applies one random structure-breaking move to `query`: either rename a
/// relation (same shape, different signature — a negative by tiered
/// identicality) or redirect an argument edge to a node whose signature
/// differs. Argument-order swaps are deliberately not used: they flip the
/// subgraph label without changing the multiset a sum aggregator sees,
/// producing negatives no such encoder can separate.
fn perturb_query(
    query: &SmtDag,
    relation_tokens: &[String],
    rng: &mut ChaCha8Rng,
) -> Option<SmtDag> {
    if rng.gen_bool(0.5) {
        if let Some(renamed) = rename_relation(query, relation_tokens, rng) {
            return Some(renamed);
        }
    }
    if query.edge_count() == 0 {
        return None;
    }
    let mut edges = query.edges().to_vec();
    let anc = ancestor_sets(query);
    let idx = rng.gen_range(0..edges.len());
    let edge = edges[idx];
    let acceptable = |w: usize| w != edge.dst && w != edge.src && !anc[edge.src][w];
    let old_sig = &query.node(edge.dst).signature;
    let mut targets: Vec<usize> = (0..query.node_count())
        .filter(|&w| acceptable(w) && &query.node(w).signature != old_sig)
        .collect();
    if targets.is_empty() {
        targets = (0..query.node_count()).filter(|&w| acceptable(w)).collect();
    }
    if targets.is_empty() {
        return None;
    }
    edges[idx].dst = targets[rng.gen_range(0..targets.len())];
    Some(rebuild_from_root(query, &edges))
}

/// Swaps one relation signature for a different token drawn from the corpus.
fn rename_relation(
    query: &SmtDag,
    relation_tokens: &[String],
    rng: &mut ChaCha8Rng,
) -> Option<SmtDag> {
    let relations: Vec<usize> = (0..query.node_count())
        .filter(|&v| query.node(v).kind == NodeKind::Relation)
        .collect();
    if relations.is_empty() {
        return None;
    }
    let v = relations[rng.gen_range(0..relations.len())];
    let old = &query.node(v).signature;
    let replacements: Vec<&String> = relation_tokens.iter().filter(|t| *t != old).collect();
    if replacements.is_empty() {
        return None;
    }
    let mut nodes = query.nodes().to_vec();
    nodes[v].signature = replacements[rng.gen_range(0..replacements.len())].clone();
    Some(SmtDag::new(nodes, query.edges().to_vec()))
}

/// Samples `n_pos` verified positive and `n_neg` verified negative order
/// pairs from the corpus. Positives extract a k-hop rooted subgraph (half of
/// them additionally pruned); negatives alternate between random cross-graph
/// root pairs and edge-perturbed positives, each certified negative by the
/// exact rooted-subgraph test.
pub fn sample_order_pairs(
    corpus: &[SmtDag],
    n_pos: usize,
    n_neg: usize,
    k: usize,
    seed: u64,
) -> Result<Vec<OrderPair>, GenError> {
    if corpus.is_empty() {
        return Err(GenError::InvalidParams("corpus is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed, 7));
    let opts = MatchOptions::default();
    let mut pairs = Vec::with_capacity(n_pos + n_neg);

    let mut relation_tokens: Vec<String> = corpus
        .iter()
        .flat_map(|g| g.nodes())
        .filter(|n| n.kind == NodeKind::Relation)
        .map(|n| n.signature.clone())
        .collect();
    relation_tokens.sort_unstable();
    relation_tokens.dedup();

    let max_attempts = 200;
    for _ in 0..n_pos {
        let mut produced = false;
        for _ in 0..max_attempts {
            let gi = rng.gen_range(0..corpus.len());
            let g = &corpus[gi];
            let root = rng.gen_range(0..g.node_count());
            let extraction = k_hop_rooted_subgraph(g, root, k).expect("root in range");
            // Pure extractions embed identically to their anchor under a
            // k-layer encoder, so most positives are pruned to carry signal.
            let query = if rng.gen_bool(0.8) {
                prune_query(&extraction.dag, &mut rng)
            } else {
                extraction.dag
            };
            if is_rooted_subgraph(&query, 0, g, root, opts) {
                pairs.push(OrderPair {
                    query,
                    query_root: 0,
                    anchor: g.clone(),
                    anchor_root: root,
                    positive: true,
                });
                produced = true;
                break;
            }
        }
        if !produced {
            return Err(GenError::InsufficientCorpus {
                kind: "positive",
                attempts: max_attempts,
            });
        }
    }

    for i in 0..n_neg {
        let cross = i % 2 == 0;
        let mut produced = false;
        for _ in 0..max_attempts {
            let gi = rng.gen_range(0..corpus.len());
            let g = &corpus[gi];
            let root = rng.gen_range(0..g.node_count());
            let extraction = k_hop_rooted_subgraph(g, root, k).expect("root in range");

            let (query, anchor_idx, anchor_root) = if cross {
                let gj = rng.gen_range(0..corpus.len());
                let other_root = rng.gen_range(0..corpus[gj].node_count());
                if gj == gi && other_root == root {
                    continue;
                }
                (extraction.dag, gj, other_root)
            } else {
                match perturb_query(&extraction.dag, &relation_tokens, &mut rng) {
                    Some(q) => (q, gi, root),
                    None => continue,
                }
            };

            let anchor = &corpus[anchor_idx];
            if !is_rooted_subgraph(&query, 0, anchor, anchor_root, opts) {
                pairs.push(OrderPair {
                    query,
                    query_root: 0,
                    anchor: anchor.clone(),
                    anchor_root,
                    positive: false,
                });
                produced = true;
                break;
            }
        }
        if !produced {
            return Err(GenError::InsufficientCorpus {
                kind: if cross {
                    "cross-graph negative"
                } else {
                    "perturbed negative"
                },
                attempts: max_attempts,
            });
        }
    }

    Ok(pairs)
}

/// Disjoint uniform split of `items` into (train, held-out) with
/// `round(fraction * n)` items in train. Relative input order is preserved
/// on both sides.
pub fn split_corpus<T>(items: Vec<T>, fraction: f64, seed: u64) -> (Vec<T>, Vec<T>) {
    assert!(
        fraction > 0.0 && fraction < 1.0,
        "fraction must be strictly between 0 and 1"
    );
    let n = items.len();
    let take = ((fraction * n as f64).round() as usize).min(n);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed, 13));
    indices.shuffle(&mut rng);
    let mut in_train = vec![false; n];
    for &i in indices.iter().take(take) {
        in_train[i] = true;
    }
    let mut train = Vec::with_capacity(take);
    let mut held = Vec::with_capacity(n - take);
    for (i, item) in items.into_iter().enumerate() {
        if in_train[i] {
            train.push(item);
        } else {
            held.push(item);
        }
    }
    (train, held)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::{adjacency_matrix, validate_dag};

    fn params() -> GenParams {
        GenParams::new(SignatureVocab::builtin(11))
    }

    #[test]
    fn minimal_shape_is_a_two_node_chain() {
        let mut p = params();
        p.depth_range = (1, 1);
        p.branching = (1, 1);
        let dag = generate_dag(&p, 5).unwrap();
        assert_eq!(dag.node_count(), 2);
        assert_ne!(dag.node(0).kind, NodeKind::Entity);
        assert_eq!(dag.node(1).kind, NodeKind::Entity);
        assert_eq!(dag.edge_count(), 1);
    }

    #[test]
    fn generation_is_deterministic() {
        let p = params();
        assert_eq!(generate_dag(&p, 99).unwrap(), generate_dag(&p, 99).unwrap());
    }

    #[test]
    fn heights_cover_the_depth_range() {
        let p = params();
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..1000u64 {
            let dag = generate_dag(&p, seed).unwrap();
            let h = node_heights(&dag).unwrap().values[0];
            seen.insert(h);
        }
        assert_eq!(seen, (2..=7).collect());
    }

    #[test]
    fn generated_graphs_are_valid() {
        let p = params();
        for seed in 0..50u64 {
            let dag = generate_dag(&p, seed).unwrap();
            assert!(validate_dag(&dag).is_valid(), "seed {seed}");
        }
    }

    #[test]
    fn tiny_cap_errors_after_retries() {
        let mut p = params();
        p.depth_range = (6, 6);
        p.branching = (3, 3);
        p.max_nodes = 4;
        assert!(matches!(
            generate_dag(&p, 0),
            Err(GenError::NodeCapExceeded { .. })
        ));
    }

    #[test]
    fn noise_free_instance_plants_an_exact_copy() {
        let mut p = params();
        p.distractor = 0.0;
        p.relabel = 0.0;
        for seed in 0..20u64 {
            let inst = sample_analogy_pair(&p, seed).unwrap();
            let gold = inst.gold.as_ref().unwrap();
            assert!(validate_dag(&inst.base).is_valid());
            assert!(validate_dag(&inst.target).is_valid());

            // Planted copy: edges correspond exactly under the gold map, in
            // both directions (X A_T X^T = A_B cell for cell).
            let a_b = adjacency_matrix(&inst.base);
            let a_t = adjacency_matrix(&inst.target);
            let map: std::collections::BTreeMap<usize, usize> = gold.iter().copied().collect();
            for i in 0..inst.base.node_count() {
                for j in 0..inst.base.node_count() {
                    assert_eq!(a_b.get(i, j), a_t.get(map[&i], map[&j]));
                }
            }
            // Signatures and kinds carry over unchanged.
            for &(b, t) in gold {
                assert_eq!(inst.base.node(b).kind, inst.target.node(t).kind);
                assert_eq!(inst.base.node(b).signature, inst.target.node(t).signature);
            }
        }
    }

    #[test]
    fn full_relabel_swaps_every_groupable_signature() {
        let mut p = params();
        p.distractor = 0.0;
        p.relabel = 1.0;
        let inst = sample_analogy_pair(&p, 3).unwrap();
        let gold = inst.gold.unwrap();
        for &(b, t) in &gold {
            let bn = inst.base.node(b);
            let tn = inst.target.node(t);
            if bn.kind == NodeKind::Relation {
                assert_eq!(bn.signature, tn.signature);
            } else {
                assert!(p.vocab.same_group(&bn.signature, &tn.signature));
                if !p.vocab.synonyms(&tn.signature).is_empty() {
                    assert_ne!(bn.signature, tn.signature);
                }
            }
        }
    }

    #[test]
    fn gold_is_one_to_one() {
        let p = params();
        for seed in 0..20u64 {
            let inst = sample_analogy_pair(&p, seed).unwrap();
            let gold = inst.gold.unwrap();
            let bases: std::collections::BTreeSet<usize> = gold.iter().map(|&(b, _)| b).collect();
            let targets: std::collections::BTreeSet<usize> = gold.iter().map(|&(_, t)| t).collect();
            assert_eq!(bases.len(), gold.len());
            assert_eq!(targets.len(), gold.len());
            for &(b, t) in &gold {
                assert!(b < inst.base.node_count());
                assert!(t < inst.target.node_count());
            }
        }
    }

    #[test]
    fn order_pairs_have_verified_labels_and_exact_counts() {
        let p = params();
        let corpus: Vec<SmtDag> = (0..10).map(|s| generate_dag(&p, s).unwrap()).collect();
        let pairs = sample_order_pairs(&corpus, 20, 20, 3, 42).unwrap();
        assert_eq!(pairs.len(), 40);
        assert_eq!(pairs.iter().filter(|p| p.positive).count(), 20);
        for pair in &pairs {
            assert!(validate_dag(&pair.query).is_valid());
            assert_eq!(
                is_rooted_subgraph(
                    &pair.query,
                    pair.query_root,
                    &pair.anchor,
                    pair.anchor_root,
                    MatchOptions::default()
                ),
                pair.positive
            );
        }
    }

    #[test]
    fn order_pairs_are_deterministic() {
        let p = params();
        let corpus: Vec<SmtDag> = (0..5).map(|s| generate_dag(&p, s).unwrap()).collect();
        let a = sample_order_pairs(&corpus, 10, 10, 3, 7).unwrap();
        let b = sample_order_pairs(&corpus, 10, 10, 3, 7).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.query, y.query);
            assert_eq!(x.anchor, y.anchor);
            assert_eq!((x.anchor_root, x.positive), (y.anchor_root, y.positive));
        }
    }

    #[test]
    fn degenerate_corpus_fails_with_insufficiency() {
        // A single two-node graph admits no verified negatives: there is no
        // second graph to cross with and no redirect target to perturb to.
        let dag = SmtDag::new(
            vec![
                SmtNode {
                    id: 0,
                    kind: NodeKind::Relation,
                    signature: "cause".into(),
                },
                SmtNode {
                    id: 1,
                    kind: NodeKind::Entity,
                    signature: "sun".into(),
                },
            ],
            vec![Edge {
                src: 0,
                dst: 1,
                pos: 0,
            }],
        );
        let result = sample_order_pairs(&[dag], 1, 2, 2, 0);
        assert!(matches!(result, Err(GenError::InsufficientCorpus { .. })));
    }

    #[test]
    fn split_is_even_and_exhaustive() {
        let items: Vec<u32> = (0..10).collect();
        let (train, held) = split_corpus(items.clone(), 0.5, 1);
        assert_eq!(train.len(), 5);
        assert_eq!(held.len(), 5);
        let mut union = [train.clone(), held.clone()].concat();
        union.sort_unstable();
        assert_eq!(union, items);
    }

    #[test]
    fn split_is_deterministic_and_seed_sensitive() {
        let items: Vec<u32> = (0..100).collect();
        let (a1, _) = split_corpus(items.clone(), 0.5, 9);
        let (a2, _) = split_corpus(items.clone(), 0.5, 9);
        let (b, _) = split_corpus(items, 0.5, 10);
        assert_eq!(a1, a2);
        assert_ne!(a1, b);
    }
}
