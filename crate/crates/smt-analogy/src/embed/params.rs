//! Encoder weights: input projection, per-layer perceptrons with a learned
//! self-loop scale, and the skip head over all layer outputs.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::Mat;

use super::EmbedConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    /// Self-loop scale: the node's own state enters aggregation as (1 + eps).
    pub eps: f64,
    pub w1: Mat,
    pub b1: Vec<f64>,
    pub w2: Mat,
    pub b2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub in_dim: usize,
    pub hidden: usize,
    pub dim: usize,
    /// hidden x in_dim
    pub proj_w: Mat,
    pub proj_b: Vec<f64>,
    pub layers: Vec<LayerParams>,
    /// dim x (layers * hidden)
    pub head_w: Mat,
    pub head_b: Vec<f64>,
}

fn uniform_init(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.gen_range(-bound..bound))
        .collect();
    Mat::from_vec(rows, cols, data)
}

impl EncoderParams {
    /// Seeded initialization: weights uniform in [-a, a] with
    /// a = sqrt(6 / (fan_in + fan_out)), biases and eps at zero.
    pub fn init(config: &EmbedConfig, in_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hidden = config.hidden;
        let proj_w = uniform_init(hidden, in_dim, &mut rng);
        let layers = (0..config.layers)
            .map(|_| LayerParams {
                eps: 0.0,
                w1: uniform_init(hidden, hidden, &mut rng),
                b1: vec![0.0; hidden],
                w2: uniform_init(hidden, hidden, &mut rng),
                b2: vec![0.0; hidden],
            })
            .collect();
        let head_w = uniform_init(config.dim, config.layers * hidden, &mut rng);
        EncoderParams {
            in_dim,
            hidden,
            dim: config.dim,
            proj_w,
            proj_b: vec![0.0; hidden],
            layers,
            head_w,
            head_b: vec![0.0; config.dim],
        }
    }

    /// Same shapes, all zeros; gradient accumulators use this.
    pub fn zeros_like(&self) -> Self {
        let layers = self
            .layers
            .iter()
            .map(|l| LayerParams {
                eps: 0.0,
                w1: Mat::zeros(l.w1.rows(), l.w1.cols()),
                b1: vec![0.0; l.b1.len()],
                w2: Mat::zeros(l.w2.rows(), l.w2.cols()),
                b2: vec![0.0; l.b2.len()],
            })
            .collect();
        EncoderParams {
            in_dim: self.in_dim,
            hidden: self.hidden,
            dim: self.dim,
            proj_w: Mat::zeros(self.proj_w.rows(), self.proj_w.cols()),
            proj_b: vec![0.0; self.proj_b.len()],
            layers,
            head_w: Mat::zeros(self.head_w.rows(), self.head_w.cols()),
            head_b: vec![0.0; self.head_b.len()],
        }
    }

    pub fn num_params(&self) -> usize {
        self.flatten().len()
    }

    /// Canonical flat order: proj.w, proj.b, per layer (eps, w1, b1, w2, b2),
    /// head.w, head.b.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend_from_slice(self.proj_w.data());
        out.extend_from_slice(&self.proj_b);
        for l in &self.layers {
            out.push(l.eps);
            out.extend_from_slice(l.w1.data());
            out.extend_from_slice(&l.b1);
            out.extend_from_slice(l.w2.data());
            out.extend_from_slice(&l.b2);
        }
        out.extend_from_slice(self.head_w.data());
        out.extend_from_slice(&self.head_b);
        out
    }

    /// Inverse of [`EncoderParams::flatten`]; panics on length mismatch.
    pub fn load_flat(&mut self, flat: &[f64]) {
        let mut cursor = 0usize;
        let mut take = |dst: &mut [f64]| {
            dst.copy_from_slice(&flat[cursor..cursor + dst.len()]);
            cursor += dst.len();
        };
        take(self.proj_w.data_mut());
        take(&mut self.proj_b);
        for l in &mut self.layers {
            let mut eps = [0.0];
            take(&mut eps);
            l.eps = eps[0];
            take(l.w1.data_mut());
            take(&mut l.b1);
            take(l.w2.data_mut());
            take(&mut l.b2);
        }
        take(self.head_w.data_mut());
        take(&mut self.head_b);
        assert_eq!(cursor, flat.len(), "flat parameter length mismatch");
    }

    /// Names matching the flat order, for checkpoint serialization.
    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = vec!["proj.w".to_string(), "proj.b".to_string()];
        for k in 0..self.layers.len() {
            names.push(format!("layer{k}.eps"));
            names.push(format!("layer{k}.w1"));
            names.push(format!("layer{k}.b1"));
            names.push(format!("layer{k}.w2"));
            names.push(format!("layer{k}.b2"));
        }
        names.push("head.w".to_string());
        names.push("head.b".to_string());
        names
    }

    pub fn is_finite(&self) -> bool {
        self.flatten().iter().all(|x| x.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_round_trips() {
        let config = EmbedConfig {
            layers: 2,
            hidden: 5,
            dim: 4,
            ..EmbedConfig::default()
        };
        let params = EncoderParams::init(&config, 7, 3);
        let flat = params.flatten();
        let mut other = EncoderParams::init(&config, 7, 99);
        other.load_flat(&flat);
        assert_eq!(params, other);
    }

    #[test]
    fn init_is_seeded() {
        let config = EmbedConfig::default();
        assert_eq!(
            EncoderParams::init(&config, 19, 5).flatten(),
            EncoderParams::init(&config, 19, 5).flatten()
        );
        assert_ne!(
            EncoderParams::init(&config, 19, 5).flatten(),
            EncoderParams::init(&config, 19, 6).flatten()
        );
    }
}
