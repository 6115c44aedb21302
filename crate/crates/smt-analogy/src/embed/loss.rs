//! Order-violation penalty and the max-margin loss over order pairs.

use crate::linalg::Mat;
use crate::synth::OrderPair;
use crate::vocab::SignatureVocab;

use super::encoder::{backward, forward};
use super::params::EncoderParams;
use super::EmbedError;

/// Squared magnitude of the elementwise violation of `h_u <= h_v`. Zero iff
/// every coordinate of `h_u` is at most the matching coordinate of `h_v`.
pub fn order_violation(h_u: &[f64], h_v: &[f64]) -> Result<f64, EmbedError> {
    if h_u.len() != h_v.len() {
        return Err(EmbedError::DimMismatch {
            expected: h_u.len(),
            found: h_v.len(),
        });
    }
    Ok(h_u
        .iter()
        .zip(h_v)
        .map(|(&u, &v)| (u - v).max(0.0).powi(2))
        .sum())
}

/// Max-margin loss: positives pay their violation directly, negatives pay
/// the shortfall of their violation below `alpha`.
pub fn margin_loss(
    params: &EncoderParams,
    batch: &[OrderPair],
    alpha: f64,
    vocab: &SignatureVocab,
) -> Result<f64, EmbedError> {
    let refs: Vec<&OrderPair> = batch.iter().collect();
    let (loss, _) = margin_loss_and_grad(params, &refs, alpha, vocab, false)?;
    Ok(loss)
}

/// Loss plus (optionally) parameter gradients over a batch.
///
/// The gradient convention at hinge and rectifier ties is zero.
pub fn margin_loss_and_grad(
    params: &EncoderParams,
    batch: &[&OrderPair],
    alpha: f64,
    vocab: &SignatureVocab,
    with_grad: bool,
) -> Result<(f64, EncoderParams), EmbedError> {
    if batch.is_empty() {
        return Err(EmbedError::DegenerateBatch);
    }
    let mut grads = params.zeros_like();
    let mut loss = 0.0;

    for pair in batch {
        let acts_q = forward(params, &pair.query, vocab);
        let acts_a = forward(params, &pair.anchor, vocab);
        let h_u = acts_q.out.row(pair.query_root);
        let h_v = acts_a.out.row(pair.anchor_root);
        let d = order_violation(h_u, h_v)?;

        // dD/dh_u per coordinate; dD/dh_v is its negation.
        let mut coeff = 0.0;
        if pair.positive {
            loss += d;
            coeff = 1.0;
        } else if d < alpha {
            loss += alpha - d;
            coeff = -1.0;
        }

        if !with_grad || coeff == 0.0 {
            continue;
        }
        let dim = h_u.len();
        let mut d_q = Mat::zeros(acts_q.out.rows(), dim);
        let mut d_a = Mat::zeros(acts_a.out.rows(), dim);
        for i in 0..dim {
            let gap = (h_u[i] - h_v[i]).max(0.0);
            if gap > 0.0 {
                let g = coeff * 2.0 * gap;
                d_q.set(pair.query_root, i, g);
                d_a.set(pair.anchor_root, i, -g);
            }
        }
        backward(params, &pair.query, &acts_q, &d_q, &mut grads);
        backward(params, &pair.anchor, &acts_a, &d_a, &mut grads);
    }

    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::k_hop_rooted_subgraph;
    use crate::embed::{encode, EmbedConfig};
    use crate::synth::{generate_dag, sample_order_pairs, GenParams};

    #[test]
    fn equal_vectors_have_zero_violation() {
        assert_eq!(order_violation(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn single_violated_coordinate() {
        assert_eq!(order_violation(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn mixed_coordinates_sum_only_positive_gaps() {
        // max(0, [1, -6, 0]) = [1, 0, 0]
        assert_eq!(
            order_violation(&[2.0, -1.0, 3.0], &[1.0, 5.0, 3.0]).unwrap(),
            1.0
        );
    }

    #[test]
    fn dimension_mismatch_errors() {
        assert!(matches!(
            order_violation(&[1.0], &[1.0, 2.0]),
            Err(EmbedError::DimMismatch { .. })
        ));
    }

    #[test]
    fn loss_matches_independent_recomputation() {
        let vocab = crate::vocab::SignatureVocab::builtin(4);
        let mut gen = GenParams::new(vocab.clone());
        gen.depth_range = (2, 3);
        let corpus: Vec<_> = (0..4).map(|s| generate_dag(&gen, s).unwrap()).collect();
        let pairs = sample_order_pairs(&corpus, 4, 4, 2, 9).unwrap();
        let config = EmbedConfig {
            hidden: 8,
            dim: 6,
            ..EmbedConfig::default()
        };
        let params = EncoderParams::init(&config, 3 + vocab.d_sig(), 1);
        let alpha = 1.0;

        let loss = margin_loss(&params, &pairs, alpha, &vocab).unwrap();

        // Second route: embeddings via the public encoder, combined by hand.
        let mut expected = 0.0;
        for pair in &pairs {
            let hq = encode(&params, &pair.query, &vocab).unwrap();
            let ha = encode(&params, &pair.anchor, &vocab).unwrap();
            let d = order_violation(hq.row(pair.query_root), ha.row(pair.anchor_root)).unwrap();
            expected += if pair.positive {
                d
            } else {
                (alpha - d).max(0.0)
            };
        }
        assert!((loss - expected).abs() < 1e-12);
    }

    #[test]
    fn exact_extraction_positives_cost_nothing() {
        // The query root sees the same K-hop structure in both graphs, so
        // its embedding is identical in query and anchor and D is exactly 0.
        let vocab = crate::vocab::SignatureVocab::builtin(4);
        let gen = GenParams::new(vocab.clone());
        let g = generate_dag(&gen, 2).unwrap();
        let config = EmbedConfig {
            hidden: 8,
            dim: 6,
            ..EmbedConfig::default()
        };
        let params = EncoderParams::init(&config, 3 + vocab.d_sig(), 1);
        let ex = k_hop_rooted_subgraph(&g, 0, config.layers).unwrap();
        let pair = OrderPair {
            query: ex.dag,
            query_root: 0,
            anchor: g,
            anchor_root: 0,
            positive: true,
        };
        let loss = margin_loss(&params, &[pair], 1.0, &vocab).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let vocab = crate::vocab::SignatureVocab::builtin(4);
        let mut gen = GenParams::new(vocab.clone());
        gen.depth_range = (2, 3);
        let corpus: Vec<_> = (0..4).map(|s| generate_dag(&gen, s).unwrap()).collect();
        let pairs = sample_order_pairs(&corpus, 1, 1, 2, 5).unwrap();
        let refs: Vec<&OrderPair> = pairs.iter().collect();
        let config = EmbedConfig {
            layers: 2,
            hidden: 6,
            dim: 5,
            ..EmbedConfig::default()
        };
        let params = EncoderParams::init(&config, 3 + vocab.d_sig(), 21);
        let alpha = 1.0;
        let (_, grads) = margin_loss_and_grad(&params, &refs, alpha, &vocab, true).unwrap();

        let template = params.clone();
        let report = crate::embed::grad_check(
            |flat| {
                let mut p = template.clone();
                p.load_flat(flat);
                let (loss, _) = margin_loss_and_grad(&p, &refs, alpha, &vocab, false).unwrap();
                loss
            },
            &grads.flatten(),
            &params.flatten(),
            120,
            1e-5,
            7,
        );
        assert!(!report.non_finite);
        assert!(report.max_rel_err <= 1e-4, "{}", report.max_rel_err);
    }

    #[test]
    fn saturated_negative_costs_nothing() {
        // A hand-built pair whose violation exceeds alpha contributes zero.
        let vocab = crate::vocab::SignatureVocab::builtin(4);
        let gen = GenParams::new(vocab.clone());
        let corpus: Vec<_> = (0..4).map(|s| generate_dag(&gen, s).unwrap()).collect();
        let pairs = sample_order_pairs(&corpus, 1, 8, 3, 3).unwrap();
        let config = EmbedConfig {
            hidden: 8,
            dim: 6,
            ..EmbedConfig::default()
        };
        let params = EncoderParams::init(&config, 3 + vocab.d_sig(), 1);
        for pair in pairs.iter().filter(|p| !p.positive) {
            let hq = encode(&params, &pair.query, &vocab).unwrap();
            let ha = encode(&params, &pair.anchor, &vocab).unwrap();
            let d = order_violation(hq.row(pair.query_root), ha.row(pair.anchor_root)).unwrap();
            let loss = margin_loss(&params, std::slice::from_ref(pair), 1e-9, &vocab).unwrap();
            if d >= 1e-9 {
                assert_eq!(loss, 0.0);
            }
        }
    }
}
