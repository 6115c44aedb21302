//! The whole pipeline over files: generate a corpus, train a model, infer
//! alignments, score against gold, and export one heatmap.

use smt_analogy::embed::{train_encoder, EmbedConfig};
use smt_analogy::heatmap::export_heatmap;
use smt_analogy::infer::InferenceConfig;
use smt_analogy::io::{read_predictions, write_checkpoint, write_corpus};
use smt_analogy::oracle::SearchLimits;
use smt_analogy::pipeline::{run_pipeline, PipelineConfig};
use smt_analogy::synth::{sample_analogy_pair, sample_order_pairs, GenParams};
use smt_analogy::vocab::SignatureVocab;

fn main() {
    let dir = std::env::temp_dir().join("smt-analogy-end-to-end");
    std::fs::create_dir_all(&dir).unwrap();

    let vocab = SignatureVocab::builtin(7);
    let mut gen = GenParams::new(vocab.clone());
    gen.depth_range = (2, 3);
    gen.branching = (1, 2);
    gen.distractor = 0.3;
    gen.relabel = 0.0;

    // Corpus of planted instances small enough for the exact mapper.
    let mut instances = Vec::new();
    let mut seed = 0u64;
    while instances.len() < 10 {
        let mut inst = sample_analogy_pair(&gen, seed).unwrap();
        seed += 1;
        if inst.base.node_count() > 8 || inst.target.node_count() > 20 {
            continue;
        }
        inst.id = format!("p{:03}", instances.len());
        inst.gold = None; // let the pipeline consult the exact mapper
        instances.push(inst);
    }
    let corpus_path = dir.join("corpus.json");
    write_corpus(&corpus_path, &instances).unwrap();

    let graphs: Vec<_> = instances
        .iter()
        .flat_map(|i| [i.base.clone(), i.target.clone()])
        .collect();
    let pairs = sample_order_pairs(&graphs, 600, 600, 3, 17).unwrap();
    let config = EmbedConfig {
        layers: 3,
        hidden: 32,
        dim: 32,
        steps: 1200,
        batch_size: 32,
        ..EmbedConfig::default()
    };
    let trained = train_encoder(&config, &pairs, &vocab, 5).unwrap();
    let model_path = dir.join("model.json");
    write_checkpoint(&model_path, &config, vocab.master_seed(), &trained.params).unwrap();

    let pipeline_config = PipelineConfig {
        infer: InferenceConfig {
            max_iters: 8000,
            sigmoid_parameterization: true,
            restarts: 6,
            lambda3: 1.0,
            seed: 3,
            ..InferenceConfig::default()
        },
        limits: SearchLimits::default(),
        threads: None,
    };
    let pred_path = dir.join("predictions.json");
    let metrics_path = dir.join("metrics.json");
    let report = run_pipeline(
        &corpus_path,
        &model_path,
        &pipeline_config,
        &pred_path,
        &metrics_path,
    )
    .unwrap();

    let m = &report.aggregate;
    println!(
        "{} pairs: acc {:.3} re {:.3} pr {:.3} f1 {:.3} auc {:.3}",
        report.pairs.len(),
        m.accuracy,
        m.recall,
        m.precision,
        m.f1,
        m.roc_auc
    );
    println!(
        "exact-match rate vs the exact mapper: {:.2}",
        report.exact_match_rate
    );

    let predictions = read_predictions(&pred_path).unwrap();
    let heatmap_path = dir.join("p000.pgm");
    export_heatmap(&predictions[0].scores, &heatmap_path).unwrap();
    println!("artifacts in {}", dir.display());
}
