//! Order-preserving node embeddings: a K-layer sum-pooling graph encoder,
//! the order-violation penalty, max-margin training, and gradient checking.
//!
//! Messages flow from arguments to expressions, so a node's embedding
//! summarizes the rooted sub-DAG visible within K hops below it. Training
//! shapes the space so that rooted-subgraph queries land elementwise below
//! their anchors.

mod adam;
mod encoder;
mod gradcheck;
mod loss;
mod params;
mod train;

pub use adam::AdamState;
pub use encoder::{encode, Activations};
pub use gradcheck::{grad_check, GradCheckReport};
pub use loss::{margin_loss, margin_loss_and_grad, order_violation};
pub use params::EncoderParams;
pub use train::{train_encoder, TrainResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("parameter shapes do not match the input: {0}")]
    ShapeMismatch(String),
    #[error("non-finite loss {loss} at step {step}")]
    NonFiniteLoss { step: usize, loss: f64 },
    #[error("batch must contain at least one positive and one negative pair")]
    DegenerateBatch,
}

/// Encoder and trainer hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedConfig {
    /// Number of message-passing layers (K).
    pub layers: usize,
    /// Width of the per-layer perceptrons.
    pub hidden: usize,
    /// Output embedding dimension (d).
    pub dim: usize,
    /// Margin enforced on negative pairs.
    pub margin: f64,
    pub learning_rate: f64,
    pub steps: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            layers: 3,
            hidden: 64,
            dim: 64,
            margin: 1.0,
            learning_rate: 1e-3,
            steps: 5000,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl EmbedConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.layers < 1 || self.dim < 1 || self.hidden < 1 || self.batch_size < 1 {
            return Err(EmbedError::ShapeMismatch(
                "layers, hidden, dim, and batch size must be at least 1".into(),
            ));
        }
        if self.margin <= 0.0 || self.learning_rate <= 0.0 {
            return Err(EmbedError::ShapeMismatch(
                "margin and learning rate must be positive".into(),
            ));
        }
        Ok(())
    }
}
