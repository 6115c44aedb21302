//! Encoder forward and backward passes.
//!
//! Layer k computes `h_v = mlp_k((1 + eps_k) * h_v + sum of children h_u)`,
//! then a linear head maps the concatenation of all layer outputs to the
//! final embedding. Aggregation runs over argument edges, so information
//! flows from leaves toward expression roots.

use crate::dag::SmtDag;
use crate::linalg::Mat;
use crate::vocab::{node_features, SignatureVocab};

use super::params::EncoderParams;
use super::EmbedError;

/// Intermediate states of one forward pass, kept for backpropagation.
pub struct Activations {
    /// n x in_dim input features.
    pub x0: Mat,
    /// `h[0]` is the projected input, `h[k]` the k-th layer output; n x hidden.
    pub h: Vec<Mat>,
    /// Aggregated perceptron inputs per layer; n x hidden.
    pub pre: Vec<Mat>,
    /// Rectified hidden states per layer; n x hidden.
    pub hid: Vec<Mat>,
    /// n x dim final embeddings.
    pub out: Mat,
}

fn affine(x: &Mat, w: &Mat, b: &[f64]) -> Mat {
    let mut out = x.matmul_tb(w);
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        for (o, &bias) in row.iter_mut().zip(b) {
            *o += bias;
        }
    }
    out
}

/// Sum of each node's children rows plus (1 + eps) times its own row.
fn aggregate(dag: &SmtDag, h: &Mat, eps: f64) -> Mat {
    let mut out = Mat::zeros(h.rows(), h.cols());
    for v in 0..dag.node_count() {
        let scale = 1.0 + eps;
        {
            let src = h.row(v).to_vec();
            let dst = out.row_mut(v);
            for (d, s) in dst.iter_mut().zip(&src) {
                *d = scale * s;
            }
        }
        for &(_, child) in dag.children(v) {
            let src = h.row(child).to_vec();
            let dst = out.row_mut(v);
            for (d, s) in dst.iter_mut().zip(&src) {
                *d += s;
            }
        }
    }
    out
}

pub(super) fn forward(params: &EncoderParams, dag: &SmtDag, vocab: &SignatureVocab) -> Activations {
    let n = dag.node_count();
    let x0 = Mat::from_rows((0..n).map(|v| node_features(dag.node(v), vocab)).collect());
    let mut h = vec![affine(&x0, &params.proj_w, &params.proj_b)];
    let mut pre = Vec::with_capacity(params.layers.len());
    let mut hid = Vec::with_capacity(params.layers.len());
    for layer in &params.layers {
        let p = aggregate(dag, h.last().unwrap(), layer.eps);
        let z = affine(&p, &layer.w1, &layer.b1).relu();
        let out = affine(&z, &layer.w2, &layer.b2);
        pre.push(p);
        hid.push(z);
        h.push(out);
    }
    let concat = concat_layers(&h[1..]);
    let out = affine(&concat, &params.head_w, &params.head_b);
    Activations {
        x0,
        h,
        pre,
        hid,
        out,
    }
}

fn concat_layers(layers: &[Mat]) -> Mat {
    let n = layers[0].rows();
    let width: usize = layers.iter().map(Mat::cols).sum();
    let mut out = Mat::zeros(n, width);
    for i in 0..n {
        let row = out.row_mut(i);
        let mut offset = 0;
        for layer in layers {
            row[offset..offset + layer.cols()].copy_from_slice(layer.row(i));
            offset += layer.cols();
        }
    }
    out
}

/// Node embeddings for every node of `dag`, one row per node id.
pub fn encode(
    params: &EncoderParams,
    dag: &SmtDag,
    vocab: &SignatureVocab,
) -> Result<Mat, EmbedError> {
    if params.in_dim != 3 + vocab.d_sig() {
        return Err(EmbedError::ShapeMismatch(format!(
            "encoder expects {} input features, vocabulary provides {}",
            params.in_dim,
            3 + vocab.d_sig()
        )));
    }
    let acts = forward(params, dag, vocab);
    if !acts.out.is_finite() {
        return Err(EmbedError::ShapeMismatch(
            "encoder produced non-finite activations".into(),
        ));
    }
    Ok(acts.out)
}

/// Accumulates parameter gradients for one graph given the gradient of the
/// loss with respect to the final embeddings.
pub(super) fn backward(
    params: &EncoderParams,
    dag: &SmtDag,
    acts: &Activations,
    d_out: &Mat,
    grads: &mut EncoderParams,
) {
    let k_layers = params.layers.len();
    let hidden = params.hidden;

    let concat = concat_layers(&acts.h[1..]);
    // Head: out = concat * head_w^T + head_b.
    grads.head_w.add_scaled(&d_out.matmul_ta(&concat), 1.0);
    add_col_sums(&mut grads.head_b, d_out);
    let d_concat = d_out.matmul(&params.head_w);

    // Per-layer slices of the concat gradient seed each layer's output
    // gradient; deeper layers also receive gradient through aggregation.
    let mut d_h: Vec<Mat> = (0..=k_layers)
        .map(|_| Mat::zeros(d_out.rows(), hidden))
        .collect();
    #[allow(clippy::needless_range_loop)]
    for k in 1..=k_layers {
        let offset = (k - 1) * hidden;
        for i in 0..d_concat.rows() {
            let src = &d_concat.row(i)[offset..offset + hidden];
            d_h[k].row_mut(i).copy_from_slice(src);
        }
    }

    for k in (1..=k_layers).rev() {
        let layer = &params.layers[k - 1];
        let d_layer_out = std::mem::replace(&mut d_h[k], Mat::zeros(0, 0));

        // out = hid * w2^T + b2
        grads.layers[k - 1]
            .w2
            .add_scaled(&d_layer_out.matmul_ta(&acts.hid[k - 1]), 1.0);
        add_col_sums(&mut grads.layers[k - 1].b2, &d_layer_out);
        let mut d_hid = d_layer_out.matmul(&layer.w2);

        // hid = relu(pre * w1^T + b1); the rectifier gate is hid > 0.
        for (g, &a) in d_hid.data_mut().iter_mut().zip(acts.hid[k - 1].data()) {
            if a <= 0.0 {
                *g = 0.0;
            }
        }
        grads.layers[k - 1]
            .w1
            .add_scaled(&d_hid.matmul_ta(&acts.pre[k - 1]), 1.0);
        add_col_sums(&mut grads.layers[k - 1].b1, &d_hid);
        let d_pre = d_hid.matmul(&layer.w1);

        // pre = (1 + eps) * h_prev + sum of children rows.
        let h_prev = &acts.h[k - 1];
        let mut d_eps = 0.0;
        for (g, &a) in d_pre.data().iter().zip(h_prev.data()) {
            d_eps += g * a;
        }
        grads.layers[k - 1].eps += d_eps;

        let scale = 1.0 + layer.eps;
        for v in 0..dag.node_count() {
            let src = d_pre.row(v).to_vec();
            {
                let dst = d_h[k - 1].row_mut(v);
                for (d, s) in dst.iter_mut().zip(&src) {
                    *d += scale * s;
                }
            }
            for &(_, child) in dag.children(v) {
                let dst = d_h[k - 1].row_mut(child);
                for (d, s) in dst.iter_mut().zip(&src) {
                    *d += s;
                }
            }
        }
    }

    // Input projection: h0 = x0 * proj_w^T + proj_b.
    grads.proj_w.add_scaled(&d_h[0].matmul_ta(&acts.x0), 1.0);
    add_col_sums(&mut grads.proj_b, &d_h[0]);
}

fn add_col_sums(acc: &mut [f64], m: &Mat) {
    for i in 0..m.rows() {
        for (a, &x) in acc.iter_mut().zip(m.row(i)) {
            *a += x;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::{k_hop_rooted_subgraph, permute_ids, Edge, NodeKind, SmtNode};
    use crate::embed::EmbedConfig;

    fn vocab() -> SignatureVocab {
        SignatureVocab::builtin(2)
    }

    fn small_params(vocab: &SignatureVocab) -> EncoderParams {
        let config = EmbedConfig {
            layers: 3,
            hidden: 8,
            dim: 6,
            ..EmbedConfig::default()
        };
        EncoderParams::init(&config, 3 + vocab.d_sig(), 17)
    }

    fn node(id: usize, kind: NodeKind, sig: &str) -> SmtNode {
        SmtNode {
            id,
            kind,
            signature: sig.into(),
        }
    }

    fn chain() -> SmtDag {
        SmtDag::new(
            vec![
                node(0, NodeKind::Relation, "cause"),
                node(1, NodeKind::Function, "mass"),
                node(2, NodeKind::Entity, "sun"),
            ],
            vec![
                Edge {
                    src: 0,
                    dst: 1,
                    pos: 0,
                },
                Edge {
                    src: 1,
                    dst: 2,
                    pos: 0,
                },
            ],
        )
    }

    #[test]
    fn isolated_entities_with_equal_features_embed_equally() {
        let v = vocab();
        let params = small_params(&v);
        let dag = SmtDag::new(
            vec![
                node(0, NodeKind::Entity, "sun"),
                node(1, NodeKind::Entity, "sun"),
                node(2, NodeKind::Entity, "planet"),
            ],
            vec![],
        );
        let h = encode(&params, &dag, &v).unwrap();
        assert_eq!(h.row(0), h.row(1));
        assert_ne!(h.row(0), h.row(2));
    }

    #[test]
    fn encoding_is_permutation_equivariant() {
        let v = vocab();
        let params = small_params(&v);
        let dag = chain();
        let perm = vec![2usize, 0, 1];
        let permuted = permute_ids(&dag, &perm);
        let h = encode(&params, &dag, &v).unwrap();
        let hp = encode(&params, &permuted, &v).unwrap();
        for (old, &new) in perm.iter().enumerate() {
            assert_eq!(h.row(old), hp.row(new));
        }
    }

    #[test]
    fn isomorphic_rooted_dags_share_root_embeddings() {
        let v = vocab();
        let params = small_params(&v);
        let dag = chain();
        let other = permute_ids(&dag, &[1, 2, 0]);
        let h = encode(&params, &dag, &v).unwrap();
        let ho = encode(&params, &other, &v).unwrap();
        assert_eq!(h.row(0), ho.row(1));
    }

    #[test]
    fn root_embedding_sees_exactly_k_hops() {
        let v = vocab();
        let params = small_params(&v);
        let mut p = crate::synth::GenParams::new(v.clone());
        p.depth_range = (4, 5);
        let dag = crate::synth::generate_dag(&p, 8).unwrap();
        let h_full = encode(&params, &dag, &v).unwrap();
        for root in 0..dag.node_count() {
            let ex = k_hop_rooted_subgraph(&dag, root, params.layers.len()).unwrap();
            let h_ex = encode(&params, &ex.dag, &v).unwrap();
            assert_eq!(h_full.row(root), h_ex.row(0), "root {root}");
        }
    }

    #[test]
    fn vocab_dimension_mismatch_is_detected() {
        let v = vocab();
        let params = small_params(&v);
        let wrong = SignatureVocab::new(vec![], 8, 0);
        assert!(matches!(
            encode(&params, &chain(), &wrong),
            Err(EmbedError::ShapeMismatch(_))
        ));
    }
}
