//! End-to-end experiment pipeline: load a corpus and a checkpoint, infer an
//! alignment per pair, score against gold (from the file or the exact
//! mapper), and write predictions plus a metrics report.
//!
//! Pairs are independent, so inference fans out across worker threads; the
//! `SMT_ANALOGY_THREADS` environment variable caps the worker count. Results
//! are collected in pair order, keeping outputs byte-deterministic.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::dag::DagError;
use crate::embed::{EmbedError, EncoderParams};
use crate::infer::{
    candidate_inferences, discretize, optimize_alignment, AlignmentMatrix, InferError,
    InferenceConfig,
};
use crate::io::{
    read_checkpoint, read_corpus, read_predictions, write_corpus, write_metrics_report,
    write_predictions, IoError, MetricsReport, PairMetrics, PipelineFailure, Prediction,
};
use crate::metrics::{compute_metrics, micro_metrics, MetricsError};
use crate::oracle::{exact_structure_map, verify_alignment, OracleError, SearchLimits};
use crate::synth::AnalogyInstance;
use crate::vocab::SignatureVocab;

pub const THREADS_ENV: &str = "SMT_ANALOGY_THREADS";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Infer(#[from] InferError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("checkpoint expects {expected} input features, vocabulary provides {found}")]
    VocabMismatch { expected: usize, found: usize },
}

/// Pipeline-level knobs on top of the per-pair inference config.
#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub infer: InferenceConfig,
    pub limits: SearchLimits,
    /// Worker override; defaults to available parallelism capped by the
    /// `SMT_ANALOGY_THREADS` environment variable.
    pub threads: Option<usize>,
}

/// Effective worker count for `n_items` independent tasks.
pub fn worker_count(n_items: usize, requested: Option<usize>) -> usize {
    let hardware = std::thread::available_parallelism()
        .map(usize::from)
        .unwrap_or(1);
    let capped = match std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        Some(cap) if cap >= 1 => hardware.min(cap),
        _ => hardware,
    };
    requested.unwrap_or(capped).clamp(1, n_items.max(1))
}

/// Applies `f` to every item on `threads` workers, returning results in item
/// order.
pub fn parallel_map<T: Sync, R: Send>(
    items: &[T],
    threads: usize,
    f: impl Fn(&T) -> R + Sync,
) -> Vec<R> {
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = (0..items.len()).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads.min(items.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let result = f(&items[i]);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .unwrap()
                .expect("worker filled every slot")
        })
        .collect()
}

/// Infers one pair: optimize the alignment, discretize, extract candidates.
pub fn predict_instance(
    instance: &AnalogyInstance,
    encoder: &EncoderParams,
    vocab: &SignatureVocab,
    config: &InferenceConfig,
) -> Result<Prediction, InferError> {
    let alignment = optimize_alignment(config, instance, encoder, vocab)?;
    let binary = discretize(&alignment.scores, config.tau);
    let candidates = candidate_inferences(&instance.base, &binary);
    Ok(Prediction {
        id: instance.id.clone(),
        scores: alignment.scores,
        binary,
        objective_trace: alignment.trace,
        candidates,
    })
}

/// Runs inference over a whole corpus, recording per-pair failures instead of
/// aborting.
pub fn predict_corpus(
    instances: &[AnalogyInstance],
    encoder: &EncoderParams,
    vocab: &SignatureVocab,
    config: &PipelineConfig,
) -> (Vec<Prediction>, Vec<PipelineFailure>) {
    let threads = worker_count(instances.len(), config.threads);
    let results = parallel_map(instances, threads, |inst| {
        predict_instance(inst, encoder, vocab, &config.infer)
            .map_err(|e| (inst.id.clone(), e.to_string()))
    });
    let mut predictions = Vec::new();
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(p) => predictions.push(p),
            Err((id, error)) => failures.push(PipelineFailure { id, error }),
        }
    }
    (predictions, failures)
}

/// Gold for one instance: taken from the instance when present, otherwise
/// computed by the exact mapper. Either way the result must pass every
/// structure-mapping rule.
pub fn gold_alignment(
    instance: &AnalogyInstance,
    limits: SearchLimits,
) -> Result<AlignmentMatrix, String> {
    let pairs = match &instance.gold {
        Some(pairs) => pairs.clone(),
        None => {
            exact_structure_map(&instance.base, &instance.target, limits)
                .map_err(|e| e.to_string())?
                .best
        }
    };
    let x = AlignmentMatrix::from_pairs(
        instance.base.node_count(),
        instance.target.node_count(),
        &pairs,
    );
    let report =
        verify_alignment(&instance.base, &instance.target, &x).map_err(|e| e.to_string())?;
    if !report.all_rules_pass() {
        return Err(format!(
            "gold alignment violates structure-mapping rules: {report:?}"
        ));
    }
    Ok(x)
}

/// Scores predictions against gold matrices, micro-averaging over all cells.
pub fn evaluate(
    scored: &[(Prediction, AlignmentMatrix)],
    mut failures: Vec<PipelineFailure>,
) -> MetricsReport {
    let mut pair_entries = Vec::with_capacity(scored.len());
    let mut exact = 0usize;
    for (pred, gold) in scored {
        let metrics = compute_metrics(&pred.scores, pred.binary.mat(), gold.mat())
            .expect("shapes checked by caller");
        let exact_match = pred.binary == *gold;
        exact += usize::from(exact_match);
        pair_entries.push(PairMetrics {
            id: pred.id.clone(),
            exact_match,
            metrics,
        });
    }
    let triples: Vec<_> = scored
        .iter()
        .map(|(p, g)| (&p.scores, p.binary.mat(), g.mat()))
        .collect();
    let aggregate = micro_metrics(&triples).expect("shapes checked by caller");
    let exact_match_rate = if scored.is_empty() {
        0.0
    } else {
        exact as f64 / scored.len() as f64
    };
    failures.sort_by(|a, b| a.id.cmp(&b.id));
    MetricsReport {
        version: 1,
        pairs: pair_entries,
        aggregate,
        exact_match_rate,
        failures,
    }
}

/// Full pipeline over files: corpus + checkpoint in, predictions + metrics
/// out. Per-pair problems are recorded in the report and processing
/// continues.
pub fn run_pipeline(
    corpus_path: &Path,
    model_path: &Path,
    config: &PipelineConfig,
    predictions_path: &Path,
    metrics_path: &Path,
) -> Result<MetricsReport, PipelineError> {
    let instances = read_corpus(corpus_path)?;
    let ckpt = read_checkpoint(model_path)?;
    let vocab = SignatureVocab::builtin(ckpt.vocab_seed);
    if ckpt.params.in_dim != 3 + vocab.d_sig() {
        return Err(PipelineError::VocabMismatch {
            expected: ckpt.params.in_dim,
            found: 3 + vocab.d_sig(),
        });
    }

    let (predictions, mut failures) = predict_corpus(&instances, &ckpt.params, &vocab, config);
    write_predictions(predictions_path, &predictions)?;

    let mut scored = Vec::new();
    for pred in predictions {
        let instance = instances
            .iter()
            .find(|i| i.id == pred.id)
            .expect("prediction ids come from instances");
        match gold_alignment(instance, config.limits) {
            Ok(gold) => scored.push((pred, gold)),
            Err(error) => failures.push(PipelineFailure {
                id: pred.id.clone(),
                error,
            }),
        }
    }
    let report = evaluate(&scored, failures);
    write_metrics_report(metrics_path, &report)?;
    Ok(report)
}

/// Fills in gold alignments for every pair of a corpus file using the exact
/// mapper, writing the same corpus schema. Oversized pairs are reported and
/// keep a null gold.
pub fn oracle_corpus(
    corpus_in: &Path,
    gold_out: &Path,
    limits: SearchLimits,
    threads: Option<usize>,
) -> Result<(usize, Vec<PipelineFailure>), PipelineError> {
    let mut instances = read_corpus(corpus_in)?;
    let workers = worker_count(instances.len(), threads);
    let results = parallel_map(&instances, workers, |inst| {
        exact_structure_map(&inst.base, &inst.target, limits)
            .map(|r| r.best)
            .map_err(|e| e.to_string())
    });
    let mut failures = Vec::new();
    let mut solved = 0usize;
    for (inst, result) in instances.iter_mut().zip(results) {
        match result {
            Ok(best) => {
                inst.gold = Some(best);
                solved += 1;
            }
            Err(error) => {
                inst.gold = None;
                failures.push(PipelineFailure {
                    id: inst.id.clone(),
                    error,
                });
            }
        }
    }
    write_corpus(gold_out, &instances)?;
    Ok((solved, failures))
}

/// Evaluates a predictions file against a gold corpus file and writes the
/// metrics report.
pub fn evaluate_files(
    predictions_path: &Path,
    gold_path: &Path,
    metrics_path: &Path,
) -> Result<MetricsReport, PipelineError> {
    let predictions = read_predictions(predictions_path)?;
    let gold_instances = read_corpus(gold_path)?;

    let mut scored = Vec::new();
    let mut failures = Vec::new();
    for pred in predictions {
        let Some(instance) = gold_instances.iter().find(|i| i.id == pred.id) else {
            failures.push(PipelineFailure {
                id: pred.id.clone(),
                error: "pair missing from gold file".into(),
            });
            continue;
        };
        if pred.scores.shape() != (instance.base.node_count(), instance.target.node_count()) {
            failures.push(PipelineFailure {
                id: pred.id.clone(),
                error: format!(
                    "prediction shape {:?} does not match instance {}x{}",
                    pred.scores.shape(),
                    instance.base.node_count(),
                    instance.target.node_count()
                ),
            });
            continue;
        }
        match gold_alignment(instance, SearchLimits::default()) {
            Ok(gold) => scored.push((pred, gold)),
            Err(error) => failures.push(PipelineFailure {
                id: pred.id.clone(),
                error,
            }),
        }
    }
    let report = evaluate(&scored, failures);
    write_metrics_report(metrics_path, &report)?;
    Ok(report)
}
