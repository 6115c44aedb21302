//! Train the order-embedding encoder on sampled order pairs and save a
//! checkpoint.

use smt_analogy::embed::{train_encoder, EmbedConfig};
use smt_analogy::io::write_checkpoint;
use smt_analogy::synth::{generate_dag, sample_order_pairs, GenParams};
use smt_analogy::vocab::SignatureVocab;

fn main() {
    let vocab = SignatureVocab::builtin(7);
    let mut gen = GenParams::new(vocab.clone());
    gen.depth_range = (2, 4);
    gen.branching = (1, 2);

    let graphs: Vec<_> = (0..40)
        .map(|s| generate_dag(&gen, s).expect("generation succeeds"))
        .collect();
    let pairs = sample_order_pairs(&graphs, 300, 300, 3, 17).expect("pairs sampled");
    println!(
        "sampled {} order pairs from {} graphs",
        pairs.len(),
        graphs.len()
    );

    let config = EmbedConfig {
        layers: 3,
        hidden: 32,
        dim: 32,
        steps: 600,
        batch_size: 32,
        ..EmbedConfig::default()
    };
    let result = train_encoder(&config, &pairs, &vocab, 5).expect("training succeeds");

    let window = 50;
    for chunk_start in (0..result.loss_trace.len()).step_by(100) {
        let end = (chunk_start + window).min(result.loss_trace.len());
        let mean: f64 =
            result.loss_trace[chunk_start..end].iter().sum::<f64>() / (end - chunk_start) as f64;
        println!("step {chunk_start:4}: mean loss {mean:.4}");
    }

    let path = std::env::temp_dir().join("smt-analogy-model.json");
    write_checkpoint(&path, &config, vocab.master_seed(), &result.params)
        .expect("checkpoint written");
    println!("saved checkpoint to {}", path.display());
}
