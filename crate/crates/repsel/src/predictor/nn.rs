//! Minimal dense network with manual backpropagation and Adam. Layers may
//! splice a slice of the raw input onto the previous activation, which is
//! how the query encoding joins the neighbor encoding mid-network.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    /// Distribution over classes; trained with cross-entropy.
    Softmax,
    /// Scalar probability; trained with binary cross-entropy.
    Sigmoid,
}

/// Where a layer's input comes from: the previous activation plus an
/// optional slice of the raw input vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerWiring {
    pub out_dim: usize,
    pub raw_start: usize,
    pub raw_end: usize,
}

impl LayerWiring {
    pub fn from_prev(out_dim: usize) -> Self {
        LayerWiring { out_dim, raw_start: 0, raw_end: 0 }
    }

    pub fn with_raw(out_dim: usize, raw: std::ops::Range<usize>) -> Self {
        LayerWiring { out_dim, raw_start: raw.start, raw_end: raw.end }
    }

    fn raw_len(&self) -> usize {
        self.raw_end - self.raw_start
    }
}

#[derive(Debug, Clone)]
pub struct Dense {
    /// Row-major out_dim x in_dim.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub in_dim: usize,
    pub wiring: LayerWiring,
}

#[derive(Debug, Clone)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub out: OutputKind,
    pub input_dim: usize,
}

/// Per-layer weight and bias gradients, laid out like the model.
#[derive(Debug, Clone)]
pub struct Grads {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl Grads {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        Grads {
            w: mlp.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            b: mlp.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    pub fn accumulate(&mut self, other: &Grads) {
        for (a, b) in self.w.iter_mut().zip(&other.w) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.b.iter_mut().zip(&other.b) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, f: f64) {
        for a in self.w.iter_mut().chain(self.b.iter_mut()) {
            for x in a {
                *x *= f;
            }
        }
    }
}

/// What the loss compares the output against.
#[derive(Debug, Clone, Copy)]
pub enum Target {
    Class(usize),
    Binary(bool),
}

struct ForwardCache {
    /// Concatenated input vector actually fed to each layer.
    inputs: Vec<Vec<f64>>,
    /// Pre-activations.
    zs: Vec<Vec<f64>>,
}

impl Mlp {
    /// Builds a network with weights uniform in [-0.05, 0.05] and zero
    /// biases. The first wiring must consume a raw slice; later ones may.
    pub fn new<R: Rng>(
        input_dim: usize,
        wirings: &[LayerWiring],
        out: OutputKind,
        rng: &mut R,
    ) -> Self {
        let mut layers = Vec::with_capacity(wirings.len());
        let mut prev = 0usize;
        for wiring in wirings {
            let in_dim = prev + wiring.raw_len();
            let w = (0..in_dim * wiring.out_dim).map(|_| rng.gen_range(-0.05..=0.05)).collect();
            layers.push(Dense { w, b: vec![0.0; wiring.out_dim], in_dim, wiring: *wiring });
            prev = wiring.out_dim;
        }
        Mlp { layers, out, input_dim }
    }

    pub fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::ShapeMismatch(format!(
                "input length {} != expected {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    fn forward(&self, x: &[f64]) -> ForwardCache {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut zs = Vec::with_capacity(self.layers.len());
        let mut h: Vec<f64> = Vec::new();
        for (li, layer) in self.layers.iter().enumerate() {
            let mut input = h;
            input.extend_from_slice(&x[layer.wiring.raw_start..layer.wiring.raw_end]);
            debug_assert_eq!(input.len(), layer.in_dim);
            let mut z = layer.b.clone();
            for (j, zj) in z.iter_mut().enumerate() {
                let row = &layer.w[j * layer.in_dim..(j + 1) * layer.in_dim];
                let mut acc = 0.0;
                for (wi, xi) in row.iter().zip(&input) {
                    acc += wi * xi;
                }
                *zj += acc;
            }
            let last = li == self.layers.len() - 1;
            h = if last { z.clone() } else { z.iter().map(|v| v.max(0.0)).collect() };
            inputs.push(input);
            zs.push(z);
        }
        ForwardCache { inputs, zs }
    }

    fn output_z(&self, x: &[f64]) -> Vec<f64> {
        self.forward(x).zs.last().cloned().unwrap_or_default()
    }

    /// Softmax output distribution.
    pub fn predict_dist(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        debug_assert_eq!(self.out, OutputKind::Softmax);
        Ok(softmax(&self.output_z(x)))
    }

    /// Sigmoid output probability.
    pub fn predict_prob(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        debug_assert_eq!(self.out, OutputKind::Sigmoid);
        Ok(sigmoid(self.output_z(x)[0]))
    }

    /// Loss and its gradient with respect to every parameter.
    pub fn loss_and_grads(&self, x: &[f64], target: Target) -> Result<(f64, Grads)> {
        self.check_input(x)?;
        let cache = self.forward(x);
        let z_out = cache.zs.last().unwrap();

        let (loss, mut dz) = match (self.out, target) {
            (OutputKind::Softmax, Target::Class(t)) => {
                let p = softmax(z_out);
                let loss = -(p[t].max(1e-300)).ln();
                let mut dz = p;
                dz[t] -= 1.0;
                (loss, dz)
            }
            (OutputKind::Sigmoid, Target::Binary(t)) => {
                let z = z_out[0];
                let t = if t { 1.0 } else { 0.0 };
                // Numerically stable BCE on the logit.
                let loss = z.max(0.0) - z * t + (1.0 + (-z.abs()).exp()).ln();
                (loss, vec![sigmoid(z) - t])
            }
            _ => {
                return Err(Error::ShapeMismatch(
                    "target kind does not match output kind".into(),
                ))
            }
        };

        let mut grads = Grads::zeros_like(self);
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input = &cache.inputs[li];
            let gw = &mut grads.w[li];
            for (j, &dzj) in dz.iter().enumerate() {
                grads.b[li][j] = dzj;
                let row = &mut gw[j * layer.in_dim..(j + 1) * layer.in_dim];
                for (gi, xi) in row.iter_mut().zip(input) {
                    *gi = dzj * xi;
                }
            }
            if li == 0 {
                break;
            }
            let prev_len = self.layers[li - 1].wiring.out_dim;
            let mut dprev = vec![0.0; prev_len];
            for (j, &dzj) in dz.iter().enumerate() {
                let row = &layer.w[j * layer.in_dim..(j + 1) * layer.in_dim];
                for (dp, wi) in dprev.iter_mut().zip(row) {
                    *dp += dzj * wi;
                }
            }
            let z_prev = &cache.zs[li - 1];
            dz = dprev
                .iter()
                .zip(z_prev)
                .map(|(d, z)| if *z > 0.0 { *d } else { 0.0 })
                .collect();
        }
        Ok((loss, grads))
    }

    pub fn params_len(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    m: Grads,
    v: Grads,
    t: u64,
}

impl Adam {
    pub fn new(mlp: &Mlp, lr: f64) -> Self {
        Adam { lr, m: Grads::zeros_like(mlp), v: Grads::zeros_like(mlp), t: 0 }
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, mlp: &mut Mlp, grads: &Grads) {
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
        for li in 0..mlp.layers.len() {
            update(
                &mut mlp.layers[li].w,
                &grads.w[li],
                &mut self.m.w[li],
                &mut self.v.w[li],
                self.lr,
                bc1,
                bc2,
            );
            update(
                &mut mlp.layers[li].b,
                &grads.b[li],
                &mut self.m.b[li],
                &mut self.v.b[li],
                self.lr,
                bc1,
                bc2,
            );
        }
    }
}

fn update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    bc1: f64,
    bc2: f64,
) {
    for i in 0..params.len() {
        m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * grads[i];
        v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * grads[i] * grads[i];
        let mh = m[i] / bc1;
        let vh = v[i] / bc2;
        params[i] -= lr * mh / (vh.sqrt() + ADAM_EPS);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny(out: OutputKind, seed: u64) -> Mlp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let out_dim = if out == OutputKind::Softmax { 2 } else { 1 };
        Mlp::new(
            6,
            &[LayerWiring::with_raw(5, 0..6), LayerWiring::from_prev(out_dim)],
            out,
            &mut rng,
        )
    }

    #[test]
    fn zero_weight_model_is_uniform() {
        let mut m = tiny(OutputKind::Softmax, 1);
        for l in &mut m.layers {
            l.w.iter_mut().for_each(|w| *w = 0.0);
        }
        let dist = m.predict_dist(&[0.3; 6]).unwrap();
        assert!((dist[0] - 0.5).abs() < 1e-12);
        assert!((dist[1] - 0.5).abs() < 1e-12);

        let mut s = tiny(OutputKind::Sigmoid, 1);
        for l in &mut s.layers {
            l.w.iter_mut().for_each(|w| *w = 0.0);
        }
        assert!((s.predict_prob(&[0.3; 6]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dist_sums_to_one() {
        let m = tiny(OutputKind::Softmax, 2);
        let dist = m.predict_dist(&[0.1, -0.4, 0.9, 0.0, 2.0, -1.0]).unwrap();
        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        assert!(dist.iter().all(|p| *p >= 0.0));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let m = tiny(OutputKind::Softmax, 2);
        assert!(matches!(m.predict_dist(&[0.0; 5]), Err(crate::Error::ShapeMismatch(_))));
    }

    #[test]
    fn gradient_of_unused_weight_is_zero() {
        // A zero input component cannot contribute gradient to its column.
        let m = tiny(OutputKind::Softmax, 3);
        let mut x = [0.5; 6];
        x[2] = 0.0;
        let (_, grads) = m.loss_and_grads(&x, Target::Class(0)).unwrap();
        let in_dim = m.layers[0].in_dim;
        for j in 0..m.layers[0].wiring.out_dim {
            assert_eq!(grads.w[0][j * in_dim + 2], 0.0);
        }
    }

    fn finite_diff_check(mut mlp: Mlp, x: &[f64], target: Target) -> f64 {
        let (_, grads) = mlp.loss_and_grads(x, target).unwrap();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for li in 0..mlp.layers.len() {
            for wi in 0..mlp.layers[li].w.len() {
                let orig = mlp.layers[li].w[wi];
                mlp.layers[li].w[wi] = orig + h;
                let (lp, _) = mlp.loss_and_grads(x, target).unwrap();
                mlp.layers[li].w[wi] = orig - h;
                let (lm, _) = mlp.loss_and_grads(x, target).unwrap();
                mlp.layers[li].w[wi] = orig;
                let fd = (lp - lm) / (2.0 * h);
                let a = grads.w[li][wi];
                let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1.0);
                worst = worst.max(rel);
            }
            for bi in 0..mlp.layers[li].b.len() {
                let orig = mlp.layers[li].b[bi];
                mlp.layers[li].b[bi] = orig + h;
                let (lp, _) = mlp.loss_and_grads(x, target).unwrap();
                mlp.layers[li].b[bi] = orig - h;
                let (lm, _) = mlp.loss_and_grads(x, target).unwrap();
                mlp.layers[li].b[bi] = orig;
                let fd = (lp - lm) / (2.0 * h);
                let a = grads.b[li][bi];
                let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1.0);
                worst = worst.max(rel);
            }
        }
        worst
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for seed in 0..4 {
            let m = tiny(OutputKind::Softmax, 100 + seed);
            let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(finite_diff_check(m, &x, Target::Class(1)) < 1e-4);

            let s = tiny(OutputKind::Sigmoid, 200 + seed);
            let x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(finite_diff_check(s, &x, Target::Binary(seed % 2 == 0)) < 1e-4);
        }
    }

    #[test]
    fn gradients_flow_through_raw_spliced_layers() {
        // Query features joining at the second layer still get exact grads.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let m = Mlp::new(
            10,
            &[
                LayerWiring::with_raw(6, 0..7),
                LayerWiring::with_raw(5, 7..10),
                LayerWiring::from_prev(2),
            ],
            OutputKind::Softmax,
            &mut rng,
        );
        let x: Vec<f64> = (0..10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(finite_diff_check(m, &x, Target::Class(0)) < 1e-4);
    }

    #[test]
    fn adam_zero_gradient_leaves_weights_unchanged() {
        let mut m = tiny(OutputKind::Softmax, 5);
        let before: Vec<f64> = m.layers[0].w.clone();
        let mut opt = Adam::new(&m, 0.01);
        let zeros = Grads::zeros_like(&m);
        opt.step(&mut m, &zeros);
        assert_eq!(m.layers[0].w, before);
        assert_eq!(opt.steps_taken(), 1);
    }
}
