//! Align one planted base/target pair end to end and compare against the
//! exact structure mapper.

use smt_analogy::embed::{train_encoder, EmbedConfig};
use smt_analogy::infer::{candidate_inferences, discretize, optimize_alignment, InferenceConfig};
use smt_analogy::oracle::{exact_structure_map, verify_alignment, SearchLimits};
use smt_analogy::synth::{generate_dag, sample_analogy_pair, sample_order_pairs, GenParams};
use smt_analogy::vocab::SignatureVocab;

fn main() {
    let vocab = SignatureVocab::builtin(7);
    let mut gen = GenParams::new(vocab.clone());
    gen.depth_range = (2, 3);
    gen.branching = (1, 2);
    gen.distractor = 0.3;
    gen.relabel = 0.0;

    // A quick desk-scale encoder; heavier training sharpens the geometry.
    let graphs: Vec<_> = (0..40).map(|s| generate_dag(&gen, s).unwrap()).collect();
    let pairs = sample_order_pairs(&graphs, 400, 400, 3, 17).unwrap();
    let config = EmbedConfig {
        layers: 3,
        hidden: 32,
        dim: 32,
        steps: 800,
        batch_size: 32,
        ..EmbedConfig::default()
    };
    let encoder = train_encoder(&config, &pairs, &vocab, 5).unwrap().params;

    let instance = sample_analogy_pair(&gen, 12345).unwrap();
    println!(
        "instance: base {} nodes, target {} nodes",
        instance.base.node_count(),
        instance.target.node_count()
    );

    let infer_config = InferenceConfig {
        max_iters: 12000,
        sigmoid_parameterization: true,
        restarts: 8,
        lambda3: 1.0,
        seed: 7,
        ..InferenceConfig::default()
    };
    let alignment = optimize_alignment(&infer_config, &instance, &encoder, &vocab).unwrap();
    println!(
        "objective {:.3} -> {:.5} over {} iterations",
        alignment.trace[0], alignment.objective, alignment.iterations
    );

    let binary = discretize(&alignment.scores, infer_config.tau);
    let oracle = exact_structure_map(&instance.base, &instance.target, SearchLimits::default())
        .unwrap()
        .best;
    println!("predicted: {:?}", binary.pairs());
    println!("oracle:    {oracle:?}");
    println!(
        "exact match with the oracle best: {}",
        binary.pairs() == oracle
    );

    let report = verify_alignment(&instance.base, &instance.target, &binary).unwrap();
    println!(
        "rules: parallel-connectivity {} / one-to-one {} / tiered-identicality {}, systematicity {:.0}",
        report.parallel_connectivity,
        report.one_to_one,
        report.tiered_identicality,
        report.systematicity_score
    );

    let candidates = candidate_inferences(&instance.base, &binary);
    println!("candidate inferences: {candidates:?}");
}
