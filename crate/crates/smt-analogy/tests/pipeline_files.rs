//! File-level pipeline behavior: gold fallback to the exact mapper, per-pair
//! failure recording, empty corpora, and byte-determinism of reruns.

use std::path::Path;

use tempfile::TempDir;

use smt_analogy::embed::{train_encoder, EmbedConfig};
use smt_analogy::infer::InferenceConfig;
use smt_analogy::io::{read_metrics_report, write_checkpoint, write_corpus};
use smt_analogy::oracle::SearchLimits;
use smt_analogy::pipeline::{run_pipeline, PipelineConfig};
use smt_analogy::synth::{sample_analogy_pair, sample_order_pairs, GenParams};
use smt_analogy::vocab::SignatureVocab;

fn small_config() -> EmbedConfig {
    EmbedConfig {
        layers: 2,
        hidden: 8,
        dim: 8,
        steps: 40,
        batch_size: 8,
        ..EmbedConfig::default()
    }
}

fn write_model(dir: &Path, vocab_seed: u64) -> std::path::PathBuf {
    let vocab = SignatureVocab::builtin(vocab_seed);
    let mut gen = GenParams::new(vocab.clone());
    gen.depth_range = (2, 3);
    let graphs: Vec<_> = (0..8)
        .map(|s| smt_analogy::synth::generate_dag(&gen, s).unwrap())
        .collect();
    let pairs = sample_order_pairs(&graphs, 16, 16, 2, 3).unwrap();
    let config = small_config();
    let trained = train_encoder(&config, &pairs, &vocab, vocab_seed).unwrap();
    let path = dir.join("model.json");
    write_checkpoint(&path, &config, vocab_seed, &trained.params).unwrap();
    path
}

fn pipeline_config() -> PipelineConfig {
    PipelineConfig {
        infer: InferenceConfig {
            max_iters: 60,
            seed: 1,
            ..InferenceConfig::default()
        },
        limits: SearchLimits::default(),
        threads: Some(2),
    }
}

#[test]
fn empty_corpus_yields_zero_count_metrics() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("corpus.json");
    write_corpus(&corpus, &[]).unwrap();
    let model = write_model(dir.path(), 9);
    let pred = dir.path().join("pred.json");
    let metrics = dir.path().join("metrics.json");
    let report = run_pipeline(&corpus, &model, &pipeline_config(), &pred, &metrics).unwrap();
    assert!(report.pairs.is_empty());
    assert_eq!(report.aggregate.tp + report.aggregate.fp, 0);
    assert_eq!(report.aggregate.tn + report.aggregate.fn_, 0);
    assert!(read_metrics_report(&metrics).unwrap().pairs.is_empty());
}

#[test]
fn gold_comes_from_the_exact_mapper_when_absent() {
    let dir = TempDir::new().unwrap();
    let vocab = SignatureVocab::builtin(9);
    let mut gen = GenParams::new(vocab);
    gen.depth_range = (2, 2);
    gen.branching = (1, 2);
    gen.distractor = 0.0;
    gen.relabel = 0.0;
    let mut inst = sample_analogy_pair(&gen, 4).unwrap();
    inst.gold = None;
    let corpus = dir.path().join("corpus.json");
    write_corpus(&corpus, std::slice::from_ref(&inst)).unwrap();

    let model = write_model(dir.path(), 9);
    let pred = dir.path().join("pred.json");
    let metrics = dir.path().join("metrics.json");
    let report = run_pipeline(&corpus, &model, &pipeline_config(), &pred, &metrics).unwrap();
    assert_eq!(report.pairs.len(), 1);
    assert!(report.failures.is_empty());
}

#[test]
fn oversized_pairs_are_recorded_and_skipped() {
    let dir = TempDir::new().unwrap();
    let vocab = SignatureVocab::builtin(9);
    let mut gen = GenParams::new(vocab);
    gen.depth_range = (2, 2);
    let mut inst = sample_analogy_pair(&gen, 4).unwrap();
    inst.gold = None;
    let corpus = dir.path().join("corpus.json");
    write_corpus(&corpus, std::slice::from_ref(&inst)).unwrap();

    let model = write_model(dir.path(), 9);
    let mut config = pipeline_config();
    config.limits = SearchLimits {
        max_base_nodes: 1,
        max_target_nodes: 1,
        ..SearchLimits::default()
    };
    let pred = dir.path().join("pred.json");
    let metrics = dir.path().join("metrics.json");
    let report = run_pipeline(&corpus, &model, &config, &pred, &metrics).unwrap();
    assert!(report.pairs.is_empty());
    assert_eq!(report.failures.len(), 1);
    assert!(report.failures[0].error.contains("size"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let vocab = SignatureVocab::builtin(9);
    let mut gen = GenParams::new(vocab);
    gen.depth_range = (2, 3);
    let instances: Vec<_> = (0..3)
        .map(|s| sample_analogy_pair(&gen, s).unwrap())
        .collect();
    let corpus = dir.path().join("corpus.json");
    write_corpus(&corpus, &instances).unwrap();
    let model = write_model(dir.path(), 9);

    let outputs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
        .map(|round| {
            let pred = dir.path().join(format!("pred{round}.json"));
            let metrics = dir.path().join(format!("metrics{round}.json"));
            run_pipeline(&corpus, &model, &pipeline_config(), &pred, &metrics).unwrap();
            (
                std::fs::read(&pred).unwrap(),
                std::fs::read(&metrics).unwrap(),
            )
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
}
