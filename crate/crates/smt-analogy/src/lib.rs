//! Structure-mapping analogical reasoning between vertex-labeled DAGs.
//!
//! A base graph (the known analog) is matched into a target graph by
//! learning an order-preserving node-embedding space, optimizing a penalized
//! alignment objective over a continuous correspondence matrix, and checking
//! the result against an exact rule-based structure mapper.
//!
//! # Modules
//!
//! - [`dag`] — the graph model: node kinds, signatures, positional argument
//!   edges, validation, heights, rooted extractions, and the exact
//!   rooted-subgraph test.
//! - [`vocab`] — deterministic signature embeddings with synonym groups.
//! - [`synth`] — random DAG generation, planted analogy pairs with gold
//!   alignments, and order-pair sampling.
//! - [`embed`] — the sum-pooling graph encoder, order-violation penalty,
//!   max-margin training, and gradient checking.
//! - [`infer`] — the alignment objective, its gradient, Adam optimization of
//!   the correspondence matrix, discretization, and candidate inferences.
//! - [`oracle`] — exact maximal structure mappings and rule-by-rule
//!   verification.
//! - [`metrics`] — classification metrics over alignment cells.
//! - [`io`] — corpus, checkpoint, prediction, and metrics files.
//! - [`heatmap`] — PGM export of score matrices.
//! - [`pipeline`] — corpus-level inference and evaluation.
//! - [`fixtures`] — the textbook atom / solar-system analogy.
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release --example generate_corpus
//! cargo run --release --example train_encoder
//! cargo run --release --example order_geometry
//! cargo run --release --example align_pair
//! cargo run --release --example exact_oracle
//! cargo run --release --example candidate_inference
//! cargo run --release --example evaluate_metrics
//! cargo run --release --example export_heatmap
//! cargo run --release --example end_to_end
//! ```
//!
//! The `smt-analogy` binary wraps the same functionality as a small CLI
//! (`gen`, `train`, `infer`, `oracle`, `eval`, `heatmap`).

pub mod dag;
pub mod embed;
pub mod fixtures;
pub mod heatmap;
pub mod infer;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod pipeline;
pub mod synth;
pub mod vocab;

pub use dag::{NodeKind, SmtDag, SmtNode};
pub use embed::{EmbedConfig, EncoderParams};
pub use infer::{AlignmentMatrix, InferenceConfig};
pub use synth::{AnalogyInstance, GenParams, OrderPair};
pub use vocab::SignatureVocab;
