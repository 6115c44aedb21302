//! File formats: graphs, corpora, encoder checkpoints, predictions, and
//! metrics reports. Everything is JSON with stable field order, so identical
//! inputs serialize to identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::dag::{validate_dag, Edge, NodeKind, SmtDag, SmtNode};
use crate::embed::{EmbedConfig, EncoderParams};
use crate::infer::{AlignmentMatrix, CandidateInference};
use crate::linalg::Mat;
use crate::metrics::Metrics;
use crate::synth::AnalogyInstance;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },
}

impl IoError {
    fn data(path: &Path, message: impl Into<String>) -> Self {
        IoError::Data {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| IoError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

// ---------------------------------------------------------------------------
// Graph and corpus files
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct NodeJson {
    id: usize,
    kind: NodeKind,
    signature: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeJson {
    src: usize,
    dst: usize,
    pos: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphJson {
    version: String,
    id: String,
    nodes: Vec<NodeJson>,
    edges: Vec<EdgeJson>,
}

fn graph_to_json(id: &str, dag: &SmtDag) -> GraphJson {
    GraphJson {
        version: "1".to_string(),
        id: id.to_string(),
        nodes: dag
            .nodes()
            .iter()
            .map(|n| NodeJson {
                id: n.id,
                kind: n.kind,
                signature: n.signature.clone(),
            })
            .collect(),
        edges: dag
            .edges()
            .iter()
            .map(|e| EdgeJson {
                src: e.src,
                dst: e.dst,
                pos: e.pos,
            })
            .collect(),
    }
}

fn graph_from_json(path: &Path, g: &GraphJson) -> Result<SmtDag, IoError> {
    if g.version != "1" {
        return Err(IoError::data(
            path,
            format!("graph {:?} has unsupported version {:?}", g.id, g.version),
        ));
    }
    let nodes = g
        .nodes
        .iter()
        .map(|n| SmtNode {
            id: n.id,
            kind: n.kind,
            signature: n.signature.clone(),
        })
        .collect();
    let edges = g
        .edges
        .iter()
        .map(|e| Edge {
            src: e.src,
            dst: e.dst,
            pos: e.pos,
        })
        .collect();
    let dag = SmtDag::new(nodes, edges);
    let report = validate_dag(&dag);
    if !report.is_valid() {
        return Err(IoError::data(
            path,
            format!("graph {:?} is invalid: {:?}", g.id, report.violations),
        ));
    }
    Ok(dag)
}

/// Writes a single graph file.
pub fn write_graph(path: &Path, id: &str, dag: &SmtDag) -> Result<(), IoError> {
    write_json(path, &graph_to_json(id, dag))
}

/// Reads a single graph file, returning its id and validated graph.
pub fn read_graph(path: &Path) -> Result<(String, SmtDag), IoError> {
    let g: GraphJson = read_json(path)?;
    let dag = graph_from_json(path, &g)?;
    Ok((g.id, dag))
}

#[derive(Debug, Serialize, Deserialize)]
struct PairJson {
    id: String,
    base: String,
    target: String,
    gold: Option<Vec<(usize, usize)>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CorpusJson {
    version: u32,
    graphs: Vec<GraphJson>,
    pairs: Vec<PairJson>,
}

/// Writes instances as a corpus: each instance contributes its base and
/// target graphs (ids `<id>.base` / `<id>.target`) and one pair entry.
pub fn write_corpus(path: &Path, instances: &[AnalogyInstance]) -> Result<(), IoError> {
    let mut graphs = Vec::with_capacity(instances.len() * 2);
    let mut pairs = Vec::with_capacity(instances.len());
    for inst in instances {
        let base_id = format!("{}.base", inst.id);
        let target_id = format!("{}.target", inst.id);
        graphs.push(graph_to_json(&base_id, &inst.base));
        graphs.push(graph_to_json(&target_id, &inst.target));
        pairs.push(PairJson {
            id: inst.id.clone(),
            base: base_id,
            target: target_id,
            gold: inst.gold.clone(),
        });
    }
    write_json(
        path,
        &CorpusJson {
            version: 1,
            graphs,
            pairs,
        },
    )
}

/// Reads a corpus and resolves every pair's graph references.
pub fn read_corpus(path: &Path) -> Result<Vec<AnalogyInstance>, IoError> {
    let corpus: CorpusJson = read_json(path)?;
    if corpus.version != 1 {
        return Err(IoError::data(
            path,
            format!("unsupported corpus version {}", corpus.version),
        ));
    }
    let mut graphs: BTreeMap<String, SmtDag> = BTreeMap::new();
    for g in &corpus.graphs {
        let dag = graph_from_json(path, g)?;
        if graphs.insert(g.id.clone(), dag).is_some() {
            return Err(IoError::data(
                path,
                format!("duplicate graph id {:?}", g.id),
            ));
        }
    }
    let mut instances = Vec::with_capacity(corpus.pairs.len());
    for pair in corpus.pairs {
        let base = graphs
            .get(&pair.base)
            .ok_or_else(|| IoError::data(path, format!("unknown base graph {:?}", pair.base)))?;
        let target = graphs.get(&pair.target).ok_or_else(|| {
            IoError::data(path, format!("unknown target graph {:?}", pair.target))
        })?;
        if let Some(gold) = &pair.gold {
            for &(b, t) in gold {
                if b >= base.node_count() || t >= target.node_count() {
                    return Err(IoError::data(
                        path,
                        format!("pair {:?} gold ({b}, {t}) is out of range", pair.id),
                    ));
                }
            }
        }
        instances.push(AnalogyInstance {
            id: pair.id,
            base: base.clone(),
            target: target.clone(),
            gold: pair.gold,
        });
    }
    Ok(instances)
}

// ---------------------------------------------------------------------------
// Encoder checkpoints
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointConfigJson {
    #[serde(flatten)]
    embed: EmbedConfig,
    feature_dim: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointJson {
    version: u32,
    config: CheckpointConfigJson,
    vocab_seed: u64,
    weights: BTreeMap<String, Value>,
}

/// A trained encoder with everything needed to reconstruct it.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config: EmbedConfig,
    pub vocab_seed: u64,
    pub params: EncoderParams,
}

fn mat_to_value(m: &Mat) -> Value {
    json!(m.to_nested())
}

fn vec_to_value(v: &[f64]) -> Value {
    json!(v)
}

fn value_to_mat(
    path: &Path,
    name: &str,
    value: &Value,
    rows: usize,
    cols: usize,
) -> Result<Mat, IoError> {
    let rows_v = value
        .as_array()
        .ok_or_else(|| IoError::data(path, format!("weight {name} is not an array")))?;
    if rows_v.len() != rows {
        return Err(IoError::data(
            path,
            format!("weight {name} has {} rows, expected {rows}", rows_v.len()),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for row in rows_v {
        let cells = row
            .as_array()
            .ok_or_else(|| IoError::data(path, format!("weight {name} row is not an array")))?;
        if cells.len() != cols {
            return Err(IoError::data(
                path,
                format!("weight {name} has {} cols, expected {cols}", cells.len()),
            ));
        }
        for c in cells {
            data.push(c.as_f64().ok_or_else(|| {
                IoError::data(path, format!("weight {name} has a non-numeric cell"))
            })?);
        }
    }
    Ok(Mat::from_vec(rows, cols, data))
}

fn value_to_vec(path: &Path, name: &str, value: &Value, len: usize) -> Result<Vec<f64>, IoError> {
    let cells = value
        .as_array()
        .ok_or_else(|| IoError::data(path, format!("weight {name} is not an array")))?;
    if cells.len() != len {
        return Err(IoError::data(
            path,
            format!("weight {name} has length {}, expected {len}", cells.len()),
        ));
    }
    cells
        .iter()
        .map(|c| {
            c.as_f64()
                .ok_or_else(|| IoError::data(path, format!("weight {name} has a non-numeric cell")))
        })
        .collect()
}

pub fn write_checkpoint(
    path: &Path,
    config: &EmbedConfig,
    vocab_seed: u64,
    params: &EncoderParams,
) -> Result<(), IoError> {
    let mut weights = BTreeMap::new();
    weights.insert("proj.w".to_string(), mat_to_value(&params.proj_w));
    weights.insert("proj.b".to_string(), vec_to_value(&params.proj_b));
    for (k, layer) in params.layers.iter().enumerate() {
        weights.insert(format!("layer{k}.eps"), json!(layer.eps));
        weights.insert(format!("layer{k}.w1"), mat_to_value(&layer.w1));
        weights.insert(format!("layer{k}.b1"), vec_to_value(&layer.b1));
        weights.insert(format!("layer{k}.w2"), mat_to_value(&layer.w2));
        weights.insert(format!("layer{k}.b2"), vec_to_value(&layer.b2));
    }
    weights.insert("head.w".to_string(), mat_to_value(&params.head_w));
    weights.insert("head.b".to_string(), vec_to_value(&params.head_b));

    write_json(
        path,
        &CheckpointJson {
            version: 1,
            config: CheckpointConfigJson {
                embed: config.clone(),
                feature_dim: params.in_dim,
            },
            vocab_seed,
            weights,
        },
    )
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, IoError> {
    let ckpt: CheckpointJson = read_json(path)?;
    if ckpt.version != 1 {
        return Err(IoError::data(
            path,
            format!("unsupported checkpoint version {}", ckpt.version),
        ));
    }
    let config = ckpt.config.embed;
    let in_dim = ckpt.config.feature_dim;
    let hidden = config.hidden;
    let mut params = EncoderParams::init(&config, in_dim, 0);

    let get = |name: &str| -> Result<&Value, IoError> {
        ckpt.weights
            .get(name)
            .ok_or_else(|| IoError::data(path, format!("missing weight {name}")))
    };
    params.proj_w = value_to_mat(path, "proj.w", get("proj.w")?, hidden, in_dim)?;
    params.proj_b = value_to_vec(path, "proj.b", get("proj.b")?, hidden)?;
    for k in 0..config.layers {
        let eps_name = format!("layer{k}.eps");
        params.layers[k].eps = get(&eps_name)?
            .as_f64()
            .ok_or_else(|| IoError::data(path, format!("weight {eps_name} is not a number")))?;
        params.layers[k].w1 =
            value_to_mat(path, "w1", get(&format!("layer{k}.w1"))?, hidden, hidden)?;
        params.layers[k].b1 = value_to_vec(path, "b1", get(&format!("layer{k}.b1"))?, hidden)?;
        params.layers[k].w2 =
            value_to_mat(path, "w2", get(&format!("layer{k}.w2"))?, hidden, hidden)?;
        params.layers[k].b2 = value_to_vec(path, "b2", get(&format!("layer{k}.b2"))?, hidden)?;
    }
    params.head_w = value_to_mat(
        path,
        "head.w",
        get("head.w")?,
        config.dim,
        config.layers * hidden,
    )?;
    params.head_b = value_to_vec(path, "head.b", get("head.b")?, config.dim)?;

    Ok(Checkpoint {
        config,
        vocab_seed: ckpt.vocab_seed,
        params,
    })
}

// ---------------------------------------------------------------------------
// Predictions and metrics reports
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct CandidateJson {
    base: usize,
    anchors: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionJson {
    id: String,
    scores: Vec<Vec<f64>>,
    binary: Vec<Vec<u8>>,
    objective_trace: Vec<f64>,
    candidates: Vec<CandidateJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionsJson {
    version: u32,
    pairs: Vec<PredictionJson>,
}

/// One pair's inference output.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: String,
    pub scores: Mat,
    pub binary: AlignmentMatrix,
    pub objective_trace: Vec<f64>,
    pub candidates: Vec<CandidateInference>,
}

pub fn write_predictions(path: &Path, predictions: &[Prediction]) -> Result<(), IoError> {
    let pairs = predictions
        .iter()
        .map(|p| PredictionJson {
            id: p.id.clone(),
            scores: p.scores.to_nested(),
            binary: (0..p.binary.base_n())
                .map(|i| {
                    (0..p.binary.target_n())
                        .map(|j| u8::from(p.binary.contains(i, j)))
                        .collect()
                })
                .collect(),
            objective_trace: p.objective_trace.clone(),
            candidates: p
                .candidates
                .iter()
                .map(|c| CandidateJson {
                    base: c.base,
                    anchors: c.anchors.clone(),
                })
                .collect(),
        })
        .collect();
    write_json(path, &PredictionsJson { version: 1, pairs })
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>, IoError> {
    let parsed: PredictionsJson = read_json(path)?;
    if parsed.version != 1 {
        return Err(IoError::data(
            path,
            format!("unsupported predictions version {}", parsed.version),
        ));
    }
    parsed
        .pairs
        .into_iter()
        .map(|p| {
            let rows = p.scores.len();
            let cols = p.scores.first().map_or(0, Vec::len);
            if p.scores.iter().any(|r| r.len() != cols)
                || p.binary.len() != rows
                || p.binary.iter().any(|r| r.len() != cols)
            {
                return Err(IoError::data(
                    path,
                    format!("pair {:?} has ragged or mismatched matrices", p.id),
                ));
            }
            let scores = Mat::from_rows(p.scores);
            let binary = Mat::from_vec(
                rows,
                cols,
                p.binary
                    .iter()
                    .flat_map(|r| r.iter().map(|&b| f64::from(b)))
                    .collect(),
            );
            Ok(Prediction {
                id: p.id,
                scores,
                binary: AlignmentMatrix::from_mat(binary),
                objective_trace: p.objective_trace,
                candidates: p
                    .candidates
                    .into_iter()
                    .map(|c| CandidateInference {
                        base: c.base,
                        anchors: c.anchors,
                    })
                    .collect(),
            })
        })
        .collect()
}

/// Per-pair evaluation entry in a metrics report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairMetrics {
    pub id: String,
    /// Binary prediction equals gold cell for cell.
    pub exact_match: bool,
    pub metrics: Metrics,
}

/// Evaluation report: per-pair metrics plus a micro-averaged aggregate over
/// all cells of all pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub version: u32,
    pub pairs: Vec<PairMetrics>,
    pub aggregate: Metrics,
    pub exact_match_rate: f64,
    pub failures: Vec<PipelineFailure>,
}

/// A pair the pipeline could not process, with the reason.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineFailure {
    pub id: String,
    pub error: String,
}

pub fn write_metrics_report(path: &Path, report: &MetricsReport) -> Result<(), IoError> {
    write_json(path, report)
}

pub fn read_metrics_report(path: &Path) -> Result<MetricsReport, IoError> {
    read_json(path)
}
