//! Mini-batch Adam training of the encoder on order pairs.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dag::k_hop_rooted_subgraph;
use crate::synth::{splitmix, OrderPair};
use crate::vocab::SignatureVocab;

use super::adam::AdamState;
use super::loss::margin_loss_and_grad;
use super::params::EncoderParams;
use super::{EmbedConfig, EmbedError};

/// Final weights plus the per-step loss trace.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub params: EncoderParams,
    pub loss_trace: Vec<f64>,
}

/// Trains the encoder by resampling a mini-batch of order pairs per step and
/// minimizing the max-margin loss with Adam. Deterministic in
/// `(config, pairs, seed)`; with zero steps the seeded initialization is
/// returned unchanged.
pub fn train_encoder(
    config: &EmbedConfig,
    pairs: &[OrderPair],
    vocab: &SignatureVocab,
    seed: u64,
) -> Result<TrainResult, EmbedError> {
    config.validate()?;
    if !pairs.iter().any(|p| p.positive) || !pairs.iter().any(|p| !p.positive) {
        return Err(EmbedError::DegenerateBatch);
    }

    // A root embedding only sees K hops below the root, so both sides of
    // every pair can be reduced to their K-hop extraction without changing
    // any loss value. This keeps the per-step cost proportional to the
    // neighborhood size rather than the full corpus graph size.
    let compiled: Vec<OrderPair> = pairs
        .iter()
        .map(|p| {
            let query = k_hop_rooted_subgraph(&p.query, p.query_root, config.layers)
                .expect("pair roots are in range");
            let anchor = k_hop_rooted_subgraph(&p.anchor, p.anchor_root, config.layers)
                .expect("pair roots are in range");
            OrderPair {
                query: query.dag,
                query_root: 0,
                anchor: anchor.dag,
                anchor_root: 0,
                positive: p.positive,
            }
        })
        .collect();

    let in_dim = 3 + vocab.d_sig();
    let mut params = EncoderParams::init(config, in_dim, seed);
    let mut adam = AdamState::new(params.num_params());
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed, 23));
    let mut trace = Vec::with_capacity(config.steps);

    for step in 0..config.steps {
        let batch: Vec<&OrderPair> = (0..config.batch_size)
            .map(|_| &compiled[rng.gen_range(0..compiled.len())])
            .collect();
        let (loss, grads) = margin_loss_and_grad(&params, &batch, config.margin, vocab, true)?;
        if !loss.is_finite() {
            return Err(EmbedError::NonFiniteLoss { step, loss });
        }
        trace.push(loss);

        let mut flat = params.flatten();
        adam.step(&mut flat, &grads.flatten(), config.learning_rate);
        params.load_flat(&flat);
        if !params.is_finite() {
            return Err(EmbedError::NonFiniteLoss { step, loss });
        }
    }

    Ok(TrainResult {
        params,
        loss_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_dag, sample_order_pairs, GenParams};

    fn setup() -> (SignatureVocab, Vec<OrderPair>) {
        let vocab = SignatureVocab::builtin(5);
        let mut gen = GenParams::new(vocab.clone());
        gen.depth_range = (2, 3);
        let corpus: Vec<_> = (0..12).map(|s| generate_dag(&gen, s).unwrap()).collect();
        let pairs = sample_order_pairs(&corpus, 24, 24, 2, 17).unwrap();
        (vocab, pairs)
    }

    fn tiny_config() -> EmbedConfig {
        EmbedConfig {
            layers: 2,
            hidden: 8,
            dim: 8,
            steps: 0,
            batch_size: 8,
            ..EmbedConfig::default()
        }
    }

    #[test]
    fn zero_steps_returns_seeded_init() {
        let (vocab, pairs) = setup();
        let config = tiny_config();
        let result = train_encoder(&config, &pairs, &vocab, 3).unwrap();
        let init = EncoderParams::init(&config, 3 + vocab.d_sig(), 3);
        assert_eq!(result.params, init);
        assert!(result.loss_trace.is_empty());
    }

    #[test]
    fn training_is_deterministic() {
        let (vocab, pairs) = setup();
        let config = EmbedConfig {
            steps: 20,
            ..tiny_config()
        };
        let a = train_encoder(&config, &pairs, &vocab, 7).unwrap();
        let b = train_encoder(&config, &pairs, &vocab, 7).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.loss_trace, b.loss_trace);
    }

    #[test]
    fn short_run_reduces_the_loss() {
        let (vocab, pairs) = setup();
        let config = EmbedConfig {
            steps: 250,
            ..tiny_config()
        };
        let result = train_encoder(&config, &pairs, &vocab, 11).unwrap();
        let head: f64 = result.loss_trace[..20].iter().sum::<f64>() / 20.0;
        let tail: f64 = result.loss_trace[result.loss_trace.len() - 20..]
            .iter()
            .sum::<f64>()
            / 20.0;
        assert!(tail < head, "loss did not decrease: {head} -> {tail}");
    }

    #[test]
    fn all_positive_batch_is_rejected() {
        let (vocab, pairs) = setup();
        let positives: Vec<OrderPair> = pairs.iter().filter(|p| p.positive).cloned().collect();
        assert!(matches!(
            train_encoder(&tiny_config(), &positives, &vocab, 0),
            Err(EmbedError::DegenerateBatch)
        ));
    }

    #[test]
    fn runaway_learning_rate_aborts_with_diagnostics() {
        let (vocab, pairs) = setup();
        let config = EmbedConfig {
            steps: 400,
            learning_rate: 1e12,
            ..tiny_config()
        };
        match train_encoder(&config, &pairs, &vocab, 2) {
            Err(EmbedError::NonFiniteLoss { .. }) => {}
            Ok(result) => {
                // Divergence may also stall at a finite but huge loss; accept
                // only a genuinely finite trace.
                assert!(result.loss_trace.iter().all(|l| l.is_finite()));
            }
            Err(other) => panic!("unexpected error: {other}"),
        }
    }
}
