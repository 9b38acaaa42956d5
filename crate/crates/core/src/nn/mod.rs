//! Small dense feed-forward networks with hand-written reverse mode.
//!
//! Every layer caches its input and pre-activation on [`Mlp::forward`], so a
//! following [`Mlp::backward`] can accumulate parameter gradients and return
//! the gradient with respect to the network input. Gradients accumulate
//! across calls until [`Mlp::zero_grad`], which is how minibatches are summed.

mod adam;
mod gradcheck;
mod io;

pub use adam::Adam;
pub use gradcheck::{gradient_check, GradCheckReport};
pub use io::{NetworkManifest, MAGIC, FORMAT_VERSION};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("backward called without a cached forward pass")]
    NoCachedForward,
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("malformed parameter file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, NnError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Relu,
    Linear,
    /// `lo + (hi - lo) * sigmoid(z)`, onto the open interval `(lo, hi)`.
    ScaledSigmoid { lo: f64, hi: f64 },
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    pub fn apply(&self, z: f64) -> f64 {
        match *self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
            Activation::ScaledSigmoid { lo, hi } => lo + (hi - lo) * sigmoid(z),
        }
    }

    /// Derivative at pre-activation `z`, given `y = apply(z)`.
    fn derivative(&self, z: f64, y: f64) -> f64 {
        match *self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
            Activation::ScaledSigmoid { lo, hi } => {
                let s = sigmoid(z);
                (hi - lo) * s * (1.0 - s)
            }
        }
    }
}

/// Shape and activation of one layer, as written to the JSON sidecar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
}

#[derive(Debug, Clone, Default)]
struct Cache {
    input: Vec<f64>,
    pre: Vec<f64>,
    out: Vec<f64>,
}

/// Fully connected layer. Weights are row-major `outputs x inputs`.
#[derive(Debug, Clone)]
pub struct Dense {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation,
    grad_w: Vec<f64>,
    grad_b: Vec<f64>,
    cache: Option<Cache>,
}

impl Dense {
    pub fn from_parts(
        inputs: usize,
        outputs: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        if weights.len() != inputs * outputs {
            return Err(NnError::DimensionMismatch {
                expected: inputs * outputs,
                got: weights.len(),
            });
        }
        if bias.len() != outputs {
            return Err(NnError::DimensionMismatch {
                expected: outputs,
                got: bias.len(),
            });
        }
        Ok(Self {
            inputs,
            outputs,
            weights,
            bias,
            activation,
            grad_w: vec![0.0; inputs * outputs],
            grad_b: vec![0.0; outputs],
            cache: None,
        })
    }

    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self::from_parts(
            inputs,
            outputs,
            vec![0.0; inputs * outputs],
            vec![0.0; outputs],
            activation,
        )
        .expect("shapes agree by construction")
    }

    /// Weights and biases drawn uniformly from `[-scale, scale]`.
    pub fn uniform<R: Rng + ?Sized>(
        inputs: usize,
        outputs: usize,
        activation: Activation,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let mut layer = Self::zeros(inputs, outputs, activation);
        for w in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            *w = rng.gen_range(-scale..=scale);
        }
        layer
    }

    pub fn spec(&self) -> LayerSpec {
        LayerSpec {
            inputs: self.inputs,
            outputs: self.outputs,
            activation: self.activation,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| b + dot(row, x))
            .collect()
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// A chain of dense layers.
#[derive(Debug, Clone)]
pub struct Mlp {
    layers: Vec<Dense>,
}

impl Mlp {
    pub fn new(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(NnError::InvalidNetwork("no layers".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(NnError::DimensionMismatch {
                    expected: pair[0].outputs,
                    got: pair[1].inputs,
                });
            }
        }
        Ok(Self { layers })
    }

    /// Random network of the given widths. Hidden layers are drawn from
    /// `±1/sqrt(fan_in)`, the output layer from `±output_scale`.
    pub fn random<R: Rng + ?Sized>(
        widths: &[usize],
        hidden: Activation,
        output: Activation,
        output_scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if widths.len() < 2 {
            return Err(NnError::InvalidNetwork(
                "need at least input and output widths".into(),
            ));
        }
        let last = widths.len() - 2;
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                if k == last {
                    Dense::uniform(w[0], w[1], output, output_scale, rng)
                } else {
                    let scale = 1.0 / (w[0] as f64).sqrt();
                    Dense::uniform(w[0], w[1], hidden, scale, rng)
                }
            })
            .collect();
        Self::new(layers)
    }

    pub fn from_specs(specs: &[LayerSpec]) -> Result<Self> {
        Self::new(
            specs
                .iter()
                .map(|s| Dense::zeros(s.inputs, s.outputs, s.activation))
                .collect(),
        )
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(Dense::spec).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(NnError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Forward pass that caches what [`Mlp::backward`] needs.
    pub fn forward(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut current = x.to_vec();
        for layer in &mut self.layers {
            let pre = layer.affine(&current);
            let out: Vec<f64> = pre.iter().map(|&z| layer.activation.apply(z)).collect();
            layer.cache = Some(Cache {
                input: std::mem::replace(&mut current, out.clone()),
                pre,
                out,
            });
        }
        Ok(current)
    }

    /// Forward pass without touching caches.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut current = x.to_vec();
        for layer in &self.layers {
            current = layer
                .affine(&current)
                .into_iter()
                .map(|z| layer.activation.apply(z))
                .collect();
        }
        Ok(current)
    }

    /// Pre-activations of every layer for input `x`.
    pub fn preactivations(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_input(x)?;
        let mut current = x.to_vec();
        let mut all = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let pre = layer.affine(&current);
            current = pre.iter().map(|&z| layer.activation.apply(z)).collect();
            all.push(pre);
        }
        Ok(all)
    }

    /// Accumulates `d(output . upstream)/d(params)` into the gradient buffers
    /// and returns `d(output . upstream)/d(input)`.
    pub fn backward(&mut self, upstream: &[f64]) -> Result<Vec<f64>> {
        self.propagate(upstream, true)
    }

    /// Same input gradient as [`Mlp::backward`], leaving parameter gradients
    /// untouched.
    pub fn input_gradient(&self, upstream: &[f64]) -> Result<Vec<f64>> {
        self.check_upstream(upstream)?;
        let mut delta = upstream.to_vec();
        for layer in self.layers.iter().rev() {
            let cache = layer.cache.as_ref().ok_or(NnError::NoCachedForward)?;
            let dz = local_delta(layer, cache, &delta);
            delta = input_delta(layer, &dz);
        }
        Ok(delta)
    }

    fn check_upstream(&self, upstream: &[f64]) -> Result<()> {
        if upstream.len() != self.output_dim() {
            return Err(NnError::DimensionMismatch {
                expected: self.output_dim(),
                got: upstream.len(),
            });
        }
        Ok(())
    }

    fn propagate(&mut self, upstream: &[f64], accumulate: bool) -> Result<Vec<f64>> {
        self.check_upstream(upstream)?;
        if self.layers.iter().any(|l| l.cache.is_none()) {
            return Err(NnError::NoCachedForward);
        }
        let mut delta = upstream.to_vec();
        for layer in self.layers.iter_mut().rev() {
            let cache = layer.cache.as_ref().expect("checked above");
            let dz = local_delta(layer, cache, &delta);
            if accumulate {
                for (o, &d) in dz.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let row = &mut layer.grad_w[o * layer.inputs..(o + 1) * layer.inputs];
                    for (g, xi) in row.iter_mut().zip(&cache.input) {
                        *g += d * xi;
                    }
                    layer.grad_b[o] += d;
                }
            }
            delta = input_delta(layer, &dz);
        }
        Ok(delta)
    }

    pub fn zero_grad(&mut self) {
        for layer in &mut self.layers {
            layer.grad_w.iter_mut().for_each(|g| *g = 0.0);
            layer.grad_b.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    /// Visit each `(parameter, gradient)` pair in canonical order: per layer,
    /// weights row-major, then biases.
    pub fn visit_params_mut(&mut self, mut f: impl FnMut(&mut f64, &mut f64)) {
        for layer in &mut self.layers {
            for (p, g) in layer.weights.iter_mut().zip(layer.grad_w.iter_mut()) {
                f(p, g);
            }
            for (p, g) in layer.bias.iter_mut().zip(layer.grad_b.iter_mut()) {
                f(p, g);
            }
        }
    }

    pub fn params(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            flat.extend_from_slice(&layer.weights);
            flat.extend_from_slice(&layer.bias);
        }
        flat
    }

    pub fn grads(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            flat.extend_from_slice(&layer.grad_w);
            flat.extend_from_slice(&layer.grad_b);
        }
        flat
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(NnError::DimensionMismatch {
                expected: self.param_count(),
                got: flat.len(),
            });
        }
        let mut it = flat.iter();
        self.visit_params_mut(|p, _| *p = *it.next().expect("length checked"));
        Ok(())
    }

    /// `self <- tau * live + (1 - tau) * self`, elementwise.
    pub fn blend_from(&mut self, live: &Mlp, tau: f64) -> Result<()> {
        if self.specs() != live.specs() {
            return Err(NnError::DimensionMismatch {
                expected: self.param_count(),
                got: live.param_count(),
            });
        }
        for (mine, theirs) in self.layers.iter_mut().zip(&live.layers) {
            let pairs = mine
                .weights
                .iter_mut()
                .zip(&theirs.weights)
                .chain(mine.bias.iter_mut().zip(&theirs.bias));
            for (t, l) in pairs {
                *t = tau * l + (1.0 - tau) * *t;
            }
        }
        Ok(())
    }
}

/// Dot product over four interleaved partial sums.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let split = a.len() - a.len() % 4;
    for (wa, wb) in a[..split].chunks_exact(4).zip(b[..split].chunks_exact(4)) {
        for k in 0..4 {
            acc[k] += wa[k] * wb[k];
        }
    }
    let tail: f64 = a[split..].iter().zip(&b[split..]).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn local_delta(layer: &Dense, cache: &Cache, upstream: &[f64]) -> Vec<f64> {
    upstream
        .iter()
        .zip(cache.pre.iter().zip(&cache.out))
        .map(|(u, (&z, &y))| u * layer.activation.derivative(z, y))
        .collect()
}

fn input_delta(layer: &Dense, dz: &[f64]) -> Vec<f64> {
    let mut down = vec![0.0; layer.inputs];
    for (row, &d) in layer.weights.chunks_exact(layer.inputs).zip(dz) {
        if d == 0.0 {
            continue;
        }
        for (acc, w) in down.iter_mut().zip(row) {
            *acc += w * d;
        }
    }
    down
}
