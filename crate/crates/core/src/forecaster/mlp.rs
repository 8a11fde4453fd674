use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Fully connected network: tanh on hidden layers, identity on the scalar output.
///
/// `weights[k]` maps layer `k` to layer `k + 1` and is stored row-major with
/// shape `layer_sizes[k + 1] x layer_sizes[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Parameter-shaped container for gradients and optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn fill_zero(&mut self) {
        self.weights.iter_mut().for_each(|w| w.fill(0.0));
        self.biases.iter_mut().for_each(|b| b.fill(0.0));
    }

    /// All entries in parameter order (layer by layer, weights then biases).
    pub fn flatten(&self) -> Vec<f64> {
        flatten(&self.weights, &self.biases)
    }
}

fn flatten(weights: &[Vec<f64>], biases: &[Vec<f64>]) -> Vec<f64> {
    weights
        .iter()
        .zip(biases)
        .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
        .collect()
}

/// Reusable per-layer activation buffers.
#[derive(Debug, Clone)]
pub(crate) struct Scratch {
    activations: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Scratch {
    pub(crate) fn new(net: &Mlp) -> Self {
        Self {
            activations: net.layer_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            deltas: net.layer_sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::InvalidArchitecture(
            "need at least an input and an output layer".into(),
        ));
    }
    if let Some(i) = layer_sizes.iter().position(|&n| n == 0) {
        return Err(Error::InvalidArchitecture(format!(
            "layer {i} has zero units"
        )));
    }
    if *layer_sizes.last().unwrap() != 1 {
        return Err(Error::InvalidArchitecture(
            "output layer must have exactly one unit".into(),
        ));
    }
    Ok(())
}

impl Mlp {
    /// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` weights, zero biases.
    pub fn new(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let mut rng = seed::rng(seed);
        let weights = layer_sizes
            .windows(2)
            .map(|pair| {
                let limit = 1.0 / (pair[0] as f64).sqrt();
                (0..pair[0] * pair[1])
                    .map(|_| rng.gen_range(-limit..=limit))
                    .collect()
            })
            .collect();
        let biases = layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
        })
    }

    pub fn from_parts(
        layer_sizes: Vec<usize>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        validate_sizes(&layer_sizes)?;
        let layers = layer_sizes.len() - 1;
        if weights.len() != layers || biases.len() != layers {
            return Err(Error::InvalidArchitecture(format!(
                "expected {layers} weight matrices and bias vectors"
            )));
        }
        for k in 0..layers {
            let (fan_in, fan_out) = (layer_sizes[k], layer_sizes[k + 1]);
            if weights[k].len() != fan_in * fan_out || biases[k].len() != fan_out {
                return Err(Error::InvalidArchitecture(format!(
                    "layer {} parameters do not match {fan_out}x{fan_in}",
                    k + 1
                )));
            }
        }
        if !weights
            .iter()
            .chain(&biases)
            .flatten()
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidArchitecture("non-finite parameter".into()));
        }
        Ok(Self {
            layer_sizes,
            weights,
            biases,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    /// `(rows, cols)` of each weight matrix.
    pub fn weight_shapes(&self) -> Vec<(usize, usize)> {
        self.layer_sizes.windows(2).map(|p| (p[1], p[0])).collect()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(Vec::len).sum()
    }

    /// Parameters in the same order as [`Gradients::flatten`].
    pub fn params(&self) -> Vec<f64> {
        flatten(&self.weights, &self.biases)
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                got: flat.len(),
            });
        }
        let mut it = flat.iter().copied();
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            w.iter_mut()
                .chain(b.iter_mut())
                .for_each(|p| *p = it.next().unwrap());
        }
        Ok(())
    }

    fn check_input(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.input_size() {
            return Err(Error::DimensionMismatch {
                expected: self.input_size(),
                got: features.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, features: &[f64]) -> Result<f64> {
        self.check_input(features)?;
        let mut scratch = Scratch::new(self);
        Ok(self.forward_into(features, &mut scratch))
    }

    /// Hidden-layer activations for `features`, one vector per hidden layer.
    pub fn hidden_activations(&self, features: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_input(features)?;
        let mut scratch = Scratch::new(self);
        self.forward_into(features, &mut scratch);
        let n = scratch.activations.len();
        Ok(scratch.activations[1..n - 1].to_vec())
    }

    pub(crate) fn forward_into(&self, features: &[f64], scratch: &mut Scratch) -> f64 {
        scratch.activations[0].copy_from_slice(features);
        let last = self.weights.len() - 1;
        for k in 0..self.weights.len() {
            let (prev, rest) = scratch.activations.split_at_mut(k + 1);
            let input = &prev[k];
            let out = &mut rest[0];
            let fan_in = input.len();
            for (j, o) in out.iter_mut().enumerate() {
                let row = &self.weights[k][j * fan_in..(j + 1) * fan_in];
                let z = self.biases[k][j] + dot(row, input);
                *o = if k == last { z } else { z.tanh() };
            }
        }
        scratch.activations[last + 1][0]
    }

    /// Gradient of `0.5 * (forward(x) - target)^2`.
    pub fn backward(&self, features: &[f64], target: f64) -> Result<Gradients> {
        self.check_input(features)?;
        let mut grad = Gradients::zeros_like(self);
        let mut scratch = Scratch::new(self);
        self.accumulate_gradient(features, target, &mut grad, &mut scratch);
        Ok(grad)
    }

    /// Adds this sample's gradient into `grad`; returns the squared error.
    pub(crate) fn accumulate_gradient(
        &self,
        features: &[f64],
        target: f64,
        grad: &mut Gradients,
        scratch: &mut Scratch,
    ) -> f64 {
        let output = self.forward_into(features, scratch);
        let residual = output - target;
        let layers = self.weights.len();
        scratch.deltas[layers][0] = residual;
        for k in (0..layers).rev() {
            let fan_in = self.layer_sizes[k];
            let (lower, upper) = scratch.deltas.split_at_mut(k + 1);
            let delta = &upper[0];
            let input = &scratch.activations[k];
            for (j, &d) in delta.iter().enumerate() {
                grad.biases[k][j] += d;
                let g_row = &mut grad.weights[k][j * fan_in..(j + 1) * fan_in];
                for (g, &a) in g_row.iter_mut().zip(input) {
                    *g += d * a;
                }
            }
            if k > 0 {
                let prev = &mut lower[k];
                prev.fill(0.0);
                for (j, &d) in delta.iter().enumerate() {
                    let row = &self.weights[k][j * fan_in..(j + 1) * fan_in];
                    for (p, &w) in prev.iter_mut().zip(row) {
                        *p += w * d;
                    }
                }
                for (p, &a) in prev.iter_mut().zip(input) {
                    *p *= 1.0 - a * a;
                }
            }
        }
        residual * residual
    }

    /// `θ += step` elementwise.
    pub(crate) fn apply_step(&mut self, step: &Gradients) {
        for (w, s) in self.weights.iter_mut().zip(&step.weights) {
            w.iter_mut().zip(s).for_each(|(p, d)| *p += d);
        }
        for (b, s) in self.biases.iter_mut().zip(&step.biases) {
            b.iter_mut().zip(s).for_each(|(p, d)| *p += d);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn init_is_deterministic_and_shaped() {
        let a = Mlp::new(&[2, 3, 1], 11).unwrap();
        assert_eq!(a, Mlp::new(&[2, 3, 1], 11).unwrap());
        assert_ne!(a, Mlp::new(&[2, 3, 1], 12).unwrap());
        assert_eq!(a.weight_shapes(), vec![(3, 2), (1, 3)]);
        assert_eq!(a.weights()[0].len(), 6);
        assert!(a.biases().iter().flatten().all(|&b| b == 0.0));
        let limit = 1.0 / 2f64.sqrt();
        assert!(a.weights()[0].iter().all(|w| w.abs() <= limit));
    }

    #[test]
    fn rejects_bad_architectures() {
        assert!(matches!(
            Mlp::new(&[3, 0, 1], 0),
            Err(Error::InvalidArchitecture(_))
        ));
        assert!(matches!(
            Mlp::new(&[3], 0),
            Err(Error::InvalidArchitecture(_))
        ));
        assert!(matches!(
            Mlp::new(&[3, 2], 0),
            Err(Error::InvalidArchitecture(_))
        ));
    }

    #[test]
    fn zero_network_outputs_zero() {
        let mut net = Mlp::new(&[4, 5, 3, 1], 3).unwrap();
        net.set_params(&vec![0.0; net.num_params()]).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn linear_single_layer() {
        let net = Mlp::from_parts(vec![1, 1], vec![vec![1.5]], vec![vec![-0.25]]).unwrap();
        assert_eq!(net.forward(&[2.0]).unwrap(), 1.5 * 2.0 - 0.25);
    }

    #[test]
    fn one_hidden_unit_applies_tanh() {
        let net = Mlp::from_parts(
            vec![1, 1, 1],
            vec![vec![1.0], vec![1.0]],
            vec![vec![0.0], vec![0.0]],
        )
        .unwrap();
        let y = net.forward(&[0.5]).unwrap();
        assert!((y - 0.462_117_157_260_009_8).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let net = Mlp::new(&[3, 2, 1], 0).unwrap();
        assert!(matches!(
            net.forward(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 1
            })
        ));
        assert!(net.backward(&[1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn backward_zero_residual() {
        let net = Mlp::new(&[3, 4, 1], 5).unwrap();
        let x = [0.2, -0.3, 0.9];
        let y = net.forward(&x).unwrap();
        let g = net.backward(&x, y).unwrap();
        assert!(g.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn backward_linear_chain_rule() {
        let net = Mlp::from_parts(vec![1, 1], vec![vec![1.0]], vec![vec![0.0]]).unwrap();
        let g = net.backward(&[2.0], 0.0).unwrap();
        assert_eq!(g.weights[0][0], 4.0);
        assert_eq!(g.biases[0][0], 2.0);
    }

    /// Central differences on the loss `0.5 * (f(x) - t)^2`.
    fn numeric_gradient(net: &Mlp, x: &[f64], target: f64, eps: f64) -> Vec<f64> {
        let base = net.params();
        let mut probe = net.clone();
        let loss = |n: &Mlp| 0.5 * (n.forward(x).unwrap() - target).powi(2);
        (0..base.len())
            .map(|i| {
                let mut p = base.clone();
                p[i] = base[i] + eps;
                probe.set_params(&p).unwrap();
                let up = loss(&probe);
                p[i] = base[i] - eps;
                probe.set_params(&p).unwrap();
                let down = loss(&probe);
                (up - down) / (2.0 * eps)
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn backward_matches_finite_differences(
            seed in 0u64..1000,
            hidden in proptest::collection::vec(1usize..5, 0..3),
            inputs in 1usize..4,
            target in -1.0f64..1.0,
        ) {
            let mut sizes = vec![inputs];
            sizes.extend(&hidden);
            sizes.push(1);
            let net = Mlp::new(&sizes, seed).unwrap();
            let mut rng = seed::rng(seed ^ 0xabc);
            let x: Vec<f64> = (0..inputs).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let analytic = net.backward(&x, target).unwrap().flatten();
            let numeric = numeric_gradient(&net, &x, target, 1e-5);
            for (a, n) in analytic.iter().zip(&numeric) {
                prop_assert!((a - n).abs() <= 1e-5 * a.abs().max(n.abs()).max(1e-3));
            }
        }

        #[test]
        fn hidden_activations_are_bounded(seed in 0u64..1000, scale in 0.1f64..100.0) {
            let net = Mlp::new(&[3, 6, 4, 1], seed).unwrap();
            let x = [scale, -scale, 0.5 * scale];
            for layer in net.hidden_activations(&x).unwrap() {
                prop_assert!(layer.iter().all(|a| (-1.0..=1.0).contains(a)));
            }
        }
    }
}
