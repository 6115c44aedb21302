//! Project unmatched base structure into the target: the second cause(...)
//! of the atom has no solar counterpart, but both of its arguments do, so it
//! becomes a candidate inference.

use smt_analogy::fixtures::{rutherford_atom, solar_system};
use smt_analogy::infer::{candidate_inferences, AlignmentMatrix};
use smt_analogy::oracle::{exact_structure_map, SearchLimits};

fn main() {
    let base = rutherford_atom();
    let target = solar_system();
    let best = exact_structure_map(&base, &target, SearchLimits::default())
        .unwrap()
        .best;
    let x = AlignmentMatrix::from_pairs(base.node_count(), target.node_count(), &best);

    let unmatched: Vec<_> = (0..base.node_count())
        .filter(|&u| x.target_of(u).is_none())
        .collect();
    println!(
        "unmatched base nodes: {:?}",
        unmatched
            .iter()
            .map(|&u| format!("{} ({})", u, base.node(u).signature))
            .collect::<Vec<_>>()
    );

    for c in candidate_inferences(&base, &x) {
        let args: Vec<String> = c
            .anchors
            .iter()
            .map(|&t| target.node(t).signature.clone())
            .collect();
        println!(
            "candidate: project {}({}) into the solar system",
            base.node(c.base).signature,
            args.join(", ")
        );
    }
}
