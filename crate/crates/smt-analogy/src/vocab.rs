//! Deterministic signature embeddings with synonym groups.
//!
//! Every token maps to a seeded pseudo-random unit vector. Tokens in the same
//! synonym group share one anchor vector and differ only by a small
//! perturbation orthogonal to it, so their pairwise cosine similarity stays
//! above 0.9; unrelated tokens get independent anchors whose expected cosine
//! is 0. Embeddings depend only on the token string, the group layout, and
//! the master seed, so they are stable across processes.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dag::SmtNode;
use crate::linalg::normalize;

/// Scale of the per-token offset inside a synonym group. Orthogonalized
/// against the anchor, this bounds within-group cosine below by
/// (1 - d^2) / (1 + d^2) ~ 0.956.
const PERTURBATION: f64 = 0.15;

/// Seeded token-embedding table with synonym groups.
#[derive(Debug, Clone)]
pub struct SignatureVocab {
    groups: Vec<Vec<String>>,
    group_of: BTreeMap<String, usize>,
    d_sig: usize,
    master_seed: u64,
}

impl SignatureVocab {
    /// `groups` are disjoint synonym sets; membership in more than one group
    /// panics. `d_sig` must be at least 2.
    pub fn new(groups: Vec<Vec<String>>, d_sig: usize, master_seed: u64) -> Self {
        assert!(d_sig >= 2, "signature embedding dimension must be >= 2");
        let mut group_of = BTreeMap::new();
        for (gi, group) in groups.iter().enumerate() {
            for token in group {
                assert!(
                    group_of.insert(token.clone(), gi).is_none(),
                    "token {token:?} appears in more than one synonym group"
                );
            }
        }
        SignatureVocab {
            groups,
            group_of,
            d_sig,
            master_seed,
        }
    }

    /// The built-in vocabulary: a small stock of relation tokens (singleton
    /// groups) and concept tokens (multi-token groups) covering the bundled
    /// fixtures and the synthetic generator.
    pub fn builtin(master_seed: u64) -> Self {
        let groups = builtin_groups()
            .iter()
            .map(|g| g.iter().map(|s| s.to_string()).collect())
            .collect();
        SignatureVocab::new(groups, 16, master_seed)
    }

    pub fn d_sig(&self) -> usize {
        self.d_sig
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn groups(&self) -> &[Vec<String>] {
        &self.groups
    }

    /// Index of the synonym group containing `token`, if any.
    pub fn group_of(&self, token: &str) -> Option<usize> {
        self.group_of.get(token).copied()
    }

    /// Whether two tokens belong to the same synonym group.
    pub fn same_group(&self, a: &str, b: &str) -> bool {
        match (self.group_of(a), self.group_of(b)) {
            (Some(x), Some(y)) => x == y,
            _ => a == b,
        }
    }

    /// Synonyms of `token` other than itself.
    pub fn synonyms(&self, token: &str) -> Vec<&str> {
        match self.group_of(token) {
            Some(gi) => self.groups[gi]
                .iter()
                .map(String::as_str)
                .filter(|&t| t != token)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Unit-norm embedding of `token`. Tokens outside every group anchor on
    /// their own string.
    pub fn embed(&self, token: &str) -> Vec<f64> {
        let anchor_key: &str = match self.group_of(token) {
            Some(gi) => &self.groups[gi][0],
            None => token,
        };
        let mut anchor = self.unit_vector(&format!("anchor\u{1f}{anchor_key}"));
        let mut offset = self.unit_vector(&format!("token\u{1f}{token}"));
        // Remove the anchor component so the within-group cosine bound holds
        // regardless of how the two random directions land.
        let proj = crate::linalg::dot(&offset, &anchor);
        for (o, a) in offset.iter_mut().zip(&anchor) {
            *o -= proj * a;
        }
        normalize(&mut offset);
        for (a, o) in anchor.iter_mut().zip(&offset) {
            *a += PERTURBATION * o;
        }
        normalize(&mut anchor);
        anchor
    }

    fn unit_vector(&self, key: &str) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed ^ fnv1a(key.as_bytes()));
        let mut v: Vec<f64> = (0..self.d_sig).map(|_| gaussian(&mut rng)).collect();
        normalize(&mut v);
        v
    }
}

/// Node feature vector: 3-slot one-hot kind label followed by the signature
/// embedding, `3 + d_sig` entries in total.
pub fn node_features(node: &SmtNode, vocab: &SignatureVocab) -> Vec<f64> {
    let mut v = vec![0.0; 3 + vocab.d_sig()];
    v[node.kind.one_hot_index()] = 1.0;
    let sig = vocab.embed(&node.signature);
    v[3..].copy_from_slice(&sig);
    v
}

/// FNV-1a over raw bytes; stable across processes and platforms.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Box-Muller sample from two uniforms.
fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn builtin_groups() -> &'static [&'static [&'static str]] {
    &[
        // Relation tokens: singleton groups, matching must be verbatim.
        &["cause"],
        &["attracts"],
        &["revolves-around"],
        &["greater"],
        &["opposes"],
        &["supports"],
        &["flows-into"],
        &["connects"],
        &["before"],
        &["implies"],
        &["and"],
        &["part-of"],
        // Concept tokens for entities and functions: synonym pairs.
        &["mass", "weight"],
        &["temperature", "heat"],
        &["size", "magnitude"],
        &["distance", "separation"],
        &["speed", "velocity"],
        &["brightness", "luminosity"],
        &["charge", "polarity"],
        &["pressure", "tension"],
        &["sun", "star"],
        &["planet", "world"],
        &["electron", "charge-carrier"],
        &["nucleus", "core"],
        &["water", "fluid"],
        &["pipe", "tube"],
        &["vessel", "container"],
        &["stone", "rock"],
        &["bird", "avian"],
        &["engine", "motor"],
        &["current", "stream"],
        &["barrier", "wall"],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::NodeKind;
    use crate::linalg::{cosine, l2_norm};

    #[test]
    fn entity_features_are_one_hot_plus_unit_tail() {
        let vocab = SignatureVocab::builtin(7);
        let node = SmtNode {
            id: 0,
            kind: NodeKind::Entity,
            signature: "sun".into(),
        };
        let f = node_features(&node, &vocab);
        assert_eq!(&f[..3], &[1.0, 0.0, 0.0]);
        assert!((l2_norm(&f[3..]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn features_are_deterministic_across_instances() {
        let a = SignatureVocab::builtin(42);
        let b = SignatureVocab::builtin(42);
        let node = SmtNode {
            id: 0,
            kind: NodeKind::Function,
            signature: "mass".into(),
        };
        assert_eq!(node_features(&node, &a), node_features(&node, &b));
    }

    #[test]
    fn within_group_cosine_is_high_for_every_group() {
        let vocab = SignatureVocab::builtin(3);
        for group in vocab.groups() {
            for a in group {
                for b in group {
                    let c = cosine(&vocab.embed(a), &vocab.embed(b));
                    assert!(c >= 0.9, "cosine({a}, {b}) = {c}");
                }
            }
        }
    }

    #[test]
    fn cross_group_cosine_is_low_on_average() {
        let vocab = SignatureVocab::builtin(3);
        let firsts: Vec<&String> = vocab.groups().iter().map(|g| &g[0]).collect();
        let mut total = 0.0;
        let mut count = 0;
        for (i, a) in firsts.iter().enumerate() {
            for b in &firsts[i + 1..] {
                total += cosine(&vocab.embed(a), &vocab.embed(b)).abs();
                count += 1;
            }
        }
        assert!(total / (count as f64) < 0.5);
    }

    #[test]
    fn unknown_tokens_embed_deterministically() {
        let vocab = SignatureVocab::builtin(5);
        assert_eq!(vocab.embed("quark"), vocab.embed("quark"));
        assert!((l2_norm(&vocab.embed("quark")) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn different_seed_changes_embeddings() {
        let a = SignatureVocab::builtin(1);
        let b = SignatureVocab::builtin(2);
        assert_ne!(a.embed("sun"), b.embed("sun"));
    }

    #[test]
    #[should_panic(expected = "more than one synonym group")]
    fn overlapping_groups_panic() {
        SignatureVocab::new(vec![vec!["a".into(), "b".into()], vec!["b".into()]], 8, 0);
    }
}
