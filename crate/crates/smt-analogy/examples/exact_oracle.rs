//! Run the exact structure mapper on the classic atom / solar-system
//! analogy and verify the result rule by rule.

use smt_analogy::fixtures::{rutherford_atom, solar_system};
use smt_analogy::infer::AlignmentMatrix;
use smt_analogy::oracle::{exact_structure_map, verify_alignment, SearchLimits};

fn main() {
    let base = rutherford_atom();
    let target = solar_system();
    println!(
        "base (atom): {} nodes, target (solar system): {} nodes",
        base.node_count(),
        target.node_count()
    );

    let result = exact_structure_map(&base, &target, SearchLimits::default()).unwrap();
    println!(
        "{} maximal mappings, best has {} correspondences:",
        result.maximal.len(),
        result.best.len()
    );
    for &(u, t) in &result.best {
        println!(
            "  {:>15} ({:?})  ->  {:<15} ({:?})",
            base.node(u).signature,
            base.node(u).kind,
            target.node(t).signature,
            target.node(t).kind,
        );
    }

    let x = AlignmentMatrix::from_pairs(base.node_count(), target.node_count(), &result.best);
    let report = verify_alignment(&base, &target, &x).unwrap();
    println!(
        "rules pass: {} (systematicity {:.0}, {} correspondences)",
        report.all_rules_pass(),
        report.systematicity_score,
        report.correspondence_count
    );

    // The mapper prefers the greater-comparison that supports more causal
    // structure: greater(weight(sun), mass(planet)) over the temperature one.
    let greater_base = base
        .nodes()
        .iter()
        .find(|n| n.signature == "greater")
        .unwrap()
        .id;
    let partner = result
        .best
        .iter()
        .find(|&&(u, _)| u == greater_base)
        .map(|&(_, t)| t)
        .unwrap();
    println!(
        "the atom's greater(...) maps to target node {partner} ({}), which feeds cause(...)",
        target.node(partner).signature
    );
}
