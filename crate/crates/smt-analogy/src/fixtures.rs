//! Hand-built fixtures: the classic Rutherford-atom / solar-system analogy
//! in its textbook structure-mapping encoding.
//!
//! Node numbering follows the usual presentation: atom nodes are 1..=9 and
//! solar-system nodes are 10..=20. The helpers below convert those labels to
//! the dense internal ids of each graph (`label - 1` for the atom,
//! `label - 10` for the solar system).

use crate::dag::{Edge, NodeKind, SmtDag, SmtNode};
use crate::synth::AnalogyInstance;

fn node(id: usize, kind: NodeKind, sig: &str) -> SmtNode {
    SmtNode {
        id,
        kind,
        signature: sig.to_string(),
    }
}

fn edge(src: usize, dst: usize, pos: usize) -> Edge {
    Edge { src, dst, pos }
}

/// Base graph: the Rutherford model of the atom.
///
/// ```text
/// [1] nucleus   [2] electron   [3] mass   [4] mass
/// [5] attracts([1], [2])
/// [6] revolves-around([2], [1])
/// [9] greater([3], [4])
/// [7] cause([9], [5])
/// [8] cause([5], [6])
/// ```
pub fn rutherford_atom() -> SmtDag {
    let nodes = vec![
        node(0, NodeKind::Entity, "nucleus"),
        node(1, NodeKind::Entity, "electron"),
        node(2, NodeKind::Function, "mass"),
        node(3, NodeKind::Function, "mass"),
        node(4, NodeKind::Relation, "attracts"),
        node(5, NodeKind::Relation, "revolves-around"),
        node(6, NodeKind::Relation, "cause"),
        node(7, NodeKind::Relation, "cause"),
        node(8, NodeKind::Relation, "greater"),
    ];
    let edges = vec![
        edge(4, 0, 0),
        edge(4, 1, 1),
        edge(5, 1, 0),
        edge(5, 0, 1),
        edge(8, 2, 0),
        edge(8, 3, 1),
        edge(6, 8, 0),
        edge(6, 4, 1),
        edge(7, 4, 0),
        edge(7, 5, 1),
    ];
    SmtDag::new(nodes, edges)
}

/// Target graph: the solar system.
///
/// ```text
/// [10] sun   [11] planet
/// [12] weight   [13] mass   [14] temperature   [15] temperature
/// [16] attracts([10], [11])
/// [17] revolves-around([11], [10])
/// [18] greater([12], [13])
/// [19] greater([14], [15])
/// [20] cause([18], [16])
/// ```
///
/// Both `[18]` and `[19]` can host the atom's `greater`; only `[18]` is
/// supported by the larger causal structure through `[20]`.
pub fn solar_system() -> SmtDag {
    let nodes = vec![
        node(0, NodeKind::Entity, "sun"),
        node(1, NodeKind::Entity, "planet"),
        node(2, NodeKind::Function, "weight"),
        node(3, NodeKind::Function, "mass"),
        node(4, NodeKind::Function, "temperature"),
        node(5, NodeKind::Function, "temperature"),
        node(6, NodeKind::Relation, "attracts"),
        node(7, NodeKind::Relation, "revolves-around"),
        node(8, NodeKind::Relation, "greater"),
        node(9, NodeKind::Relation, "greater"),
        node(10, NodeKind::Relation, "cause"),
    ];
    let edges = vec![
        edge(6, 0, 0),
        edge(6, 1, 1),
        edge(7, 1, 0),
        edge(7, 0, 1),
        edge(8, 2, 0),
        edge(8, 3, 1),
        edge(9, 4, 0),
        edge(9, 5, 1),
        edge(10, 8, 0),
        edge(10, 6, 1),
    ];
    SmtDag::new(nodes, edges)
}

/// Internal base id of an atom node label in 1..=9.
pub fn atom_id(label: usize) -> usize {
    assert!((1..=9).contains(&label), "atom labels run 1..=9");
    label - 1
}

/// Internal target id of a solar-system node label in 10..=20.
pub fn solar_id(label: usize) -> usize {
    assert!((10..=20).contains(&label), "solar labels run 10..=20");
    label - 10
}

/// The full analogy instance with the textbook correspondence as gold:
/// everything maps except the second `cause`, which has no counterpart and
/// becomes a candidate inference.
pub fn rutherford_instance() -> AnalogyInstance {
    let gold = vec![
        (atom_id(1), solar_id(10)),
        (atom_id(2), solar_id(11)),
        (atom_id(3), solar_id(12)),
        (atom_id(4), solar_id(13)),
        (atom_id(5), solar_id(16)),
        (atom_id(6), solar_id(17)),
        (atom_id(7), solar_id(20)),
        (atom_id(9), solar_id(18)),
    ];
    AnalogyInstance {
        id: "rutherford".to_string(),
        base: rutherford_atom(),
        target: solar_system(),
        gold: Some(gold),
    }
}
