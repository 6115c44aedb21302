//! Generate a synthetic analogy corpus with planted gold alignments and
//! write it as a corpus JSON file.

use smt_analogy::dag::node_heights;
use smt_analogy::io::write_corpus;
use smt_analogy::synth::{sample_analogy_pair, GenParams};
use smt_analogy::vocab::SignatureVocab;

fn main() {
    let vocab = SignatureVocab::builtin(7);
    let mut params = GenParams::new(vocab);
    params.depth_range = (2, 4);
    params.branching = (1, 2);
    params.distractor = 0.3;
    params.relabel = 0.5;

    let instances: Vec<_> = (0..20)
        .map(|i| {
            let mut inst = sample_analogy_pair(&params, 100 + i).expect("generation succeeds");
            inst.id = format!("p{i:03}");
            inst
        })
        .collect();

    for inst in instances.iter().take(5) {
        let heights = node_heights(&inst.target).unwrap();
        let max_height = heights.values.iter().max().unwrap();
        println!(
            "{}: base {:2} nodes, target {:2} nodes (height {max_height}), gold {} pairs",
            inst.id,
            inst.base.node_count(),
            inst.target.node_count(),
            inst.gold.as_ref().map_or(0, Vec::len),
        );
    }
    println!("...");

    let path = std::env::temp_dir().join("smt-analogy-corpus.json");
    write_corpus(&path, &instances).expect("corpus written");
    println!("wrote {} instances to {}", instances.len(), path.display());
}
