//! Inspect the learned order geometry: rooted-subgraph pairs should have
//! near-zero violations and everything else should clear the margin.

use smt_analogy::embed::{encode, order_violation, train_encoder, EmbedConfig};
use smt_analogy::metrics::roc_auc;
use smt_analogy::synth::{generate_dag, sample_order_pairs, split_corpus, GenParams};
use smt_analogy::vocab::SignatureVocab;

fn main() {
    let vocab = SignatureVocab::builtin(7);
    let mut gen = GenParams::new(vocab.clone());
    gen.depth_range = (2, 4);
    gen.branching = (1, 2);
    let graphs: Vec<_> = (0..60)
        .map(|s| generate_dag(&gen, s).expect("generation succeeds"))
        .collect();
    let (train_graphs, held_graphs) = split_corpus(graphs, 0.5, 3);

    let train_pairs = sample_order_pairs(&train_graphs, 400, 400, 3, 17).unwrap();
    let config = EmbedConfig {
        layers: 3,
        hidden: 32,
        dim: 32,
        steps: 800,
        batch_size: 32,
        ..EmbedConfig::default()
    };
    let trained = train_encoder(&config, &train_pairs, &vocab, 5).unwrap();

    let held_pairs = sample_order_pairs(&held_graphs, 150, 150, 3, 23).unwrap();
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for pair in &held_pairs {
        let hq = encode(&trained.params, &pair.query, &vocab).unwrap();
        let ha = encode(&trained.params, &pair.anchor, &vocab).unwrap();
        let d = order_violation(hq.row(pair.query_root), ha.row(pair.anchor_root)).unwrap();
        scores.push(-d);
        labels.push(pair.positive);
        if pair.positive {
            pos.push(d);
        } else {
            neg.push(d);
        }
    }
    pos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    neg.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let quantile = |v: &[f64], q: f64| v[(q * (v.len() - 1) as f64) as usize];
    println!("held-out order violations D(query, anchor):");
    println!(
        "  positives: median {:.4}, p90 {:.4}",
        quantile(&pos, 0.5),
        quantile(&pos, 0.9)
    );
    println!(
        "  negatives: median {:.4}, p10 {:.4}",
        quantile(&neg, 0.5),
        quantile(&neg, 0.1)
    );
    println!(
        "  separation AUC {:.3} over {} pairs",
        roc_auc(&scores, &labels),
        held_pairs.len()
    );
}
