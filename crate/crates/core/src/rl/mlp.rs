//! Fully connected networks with hand-written reverse-mode gradients.
//!
//! Parameters live in one flat buffer so optimizers, Polyak averaging and
//! checkpoints treat every network uniformly. Each layer stores its weight
//! matrix as `inputs x outputs` (row-major) followed by its bias vector.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    pub fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Tanh => 1,
            Activation::Linear => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Linear),
            _ => None,
        }
    }

    fn apply(self, z: &mut [f64]) {
        match self {
            Activation::Relu => z.iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Tanh => z.iter_mut().for_each(|v| *v = v.tanh()),
            Activation::Linear => {}
        }
    }

    /// Multiplies `grad` by the derivative, expressed through the layer output.
    fn backprop(self, out: &[f64], grad: &mut [f64]) {
        match self {
            Activation::Relu => grad
                .iter_mut()
                .zip(out)
                .for_each(|(g, y)| {
                    if *y <= 0.0 {
                        *g = 0.0
                    }
                }),
            Activation::Tanh => grad
                .iter_mut()
                .zip(out)
                .for_each(|(g, y)| *g *= 1.0 - y * y),
            Activation::Linear => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct LayerSpan {
    inputs: usize,
    outputs: usize,
    offset: usize,
    activation: Activation,
}

impl LayerSpan {
    fn weight_len(&self) -> usize {
        self.inputs * self.outputs
    }
    fn bias_offset(&self) -> usize {
        self.offset + self.weight_len()
    }
    fn end(&self) -> usize {
        self.bias_offset() + self.outputs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    layers: Vec<LayerSpan>,
    params: Vec<f64>,
}

/// Intermediate outputs of a batched forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    batch: usize,
    /// `activations[0]` is the input, `activations[i + 1]` the output of layer `i`.
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("cache holds the input")
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

/// `c (m x n) = a (m x k) * b (k x n) + beta * c` with explicit strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_strides: (isize, isize),
    b: &[f64],
    b_strides: (isize, isize),
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    // SAFETY: the callers size `a`, `b` and `c` for the given dimensions and
    // strides; the asserts below guard the extents that are read or written.
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            a_strides.0,
            a_strides.1,
            b.as_ptr(),
            b_strides.0,
            b_strides.1,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

impl Mlp {
    /// Builds a zero-initialized network. `activations` has one entry per layer.
    pub fn zeros(sizes: &[usize], activations: &[Activation]) -> Result<Self> {
        if sizes.len() < 2 || activations.len() != sizes.len() - 1 {
            return Err(Error::Shape(format!(
                "{} layer sizes need {} activations, got {}",
                sizes.len(),
                sizes.len().saturating_sub(1),
                activations.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::Shape("layer sizes must be positive".into()));
        }
        let mut layers = Vec::with_capacity(activations.len());
        let mut offset = 0;
        for (i, act) in activations.iter().enumerate() {
            let span = LayerSpan {
                inputs: sizes[i],
                outputs: sizes[i + 1],
                offset,
                activation: *act,
            };
            offset = span.end();
            layers.push(span);
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            layers,
            params: vec![0.0; offset],
        })
    }

    /// Uniform fan-in initialization, `U(-1/sqrt(fan_in), 1/sqrt(fan_in))` for
    /// weights and biases. The final layer is further scaled by `final_scale`.
    pub fn init<R: Rng + ?Sized>(
        sizes: &[usize],
        activations: &[Activation],
        final_scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(sizes, activations)?;
        let last = net.layers.len() - 1;
        for (i, span) in net.layers.clone().iter().enumerate() {
            let mut bound = 1.0 / (span.inputs as f64).sqrt();
            if i == last {
                bound *= final_scale;
            }
            for p in &mut net.params[span.offset..span.end()] {
                *p = rng.random_range(-bound..=bound);
            }
        }
        Ok(net)
    }

    /// Actor shape: `obs -> 400 -> 300 -> action`, tanh output.
    pub fn actor<R: Rng + ?Sized>(obs_dim: usize, act_dim: usize, rng: &mut R) -> Result<Self> {
        Self::init(
            &[obs_dim, 400, 300, act_dim],
            &[Activation::Relu, Activation::Relu, Activation::Tanh],
            0.01,
            rng,
        )
    }

    /// Critic shape: `obs + action -> 400 -> 300 -> 1`, linear output.
    pub fn critic<R: Rng + ?Sized>(obs_dim: usize, act_dim: usize, rng: &mut R) -> Result<Self> {
        Self::init(
            &[obs_dim + act_dim, 400, 300, 1],
            &[Activation::Relu, Activation::Relu, Activation::Linear],
            1.0,
            rng,
        )
    }

    pub fn from_parts(sizes: &[usize], activations: &[Activation], params: Vec<f64>) -> Result<Self> {
        let mut net = Self::zeros(sizes, activations)?;
        if params.len() != net.params.len() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                net.params.len(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Shape("non-finite parameter".into()));
        }
        net.params = params;
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activations(&self) -> Vec<Activation> {
        self.layers.iter().map(|l| l.activation).collect()
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two sizes")
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Weight `(input i -> output o)` of layer `layer`.
    pub fn weight(&self, layer: usize, i: usize, o: usize) -> f64 {
        let l = &self.layers[layer];
        self.params[l.offset + i * l.outputs + o]
    }

    pub fn set_weight(&mut self, layer: usize, i: usize, o: usize, value: f64) {
        let l = self.layers[layer];
        self.params[l.offset + i * l.outputs + o] = value;
    }

    pub fn bias(&self, layer: usize, o: usize) -> f64 {
        let l = &self.layers[layer];
        self.params[l.bias_offset() + o]
    }

    pub fn set_bias(&mut self, layer: usize, o: usize, value: f64) {
        let l = self.layers[layer];
        self.params[l.bias_offset() + o] = value;
    }

    /// Forward pass for `batch` row-major inputs, keeping every layer output.
    pub fn forward_batch(&self, input: &[f64], batch: usize) -> Result<ForwardCache> {
        let in_dim = self.input_dim();
        if input.len() != batch * in_dim {
            return Err(Error::Shape(format!(
                "input of length {} is not {batch} x {in_dim}",
                input.len()
            )));
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.to_vec());
        for span in &self.layers {
            let x = activations.last().expect("non-empty");
            let bias = &self.params[span.bias_offset()..span.end()];
            let mut z = Vec::with_capacity(batch * span.outputs);
            for _ in 0..batch {
                z.extend_from_slice(bias);
            }
            let w = &self.params[span.offset..span.bias_offset()];
            gemm(
                batch,
                span.inputs,
                span.outputs,
                x,
                (span.inputs as isize, 1),
                w,
                (span.outputs as isize, 1),
                1.0,
                &mut z,
            );
            span.activation.apply(&mut z);
            activations.push(z);
        }
        Ok(ForwardCache { batch, activations })
    }

    /// Single-sample forward pass.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_batch(input, 1)?.activations.pop().expect("output"))
    }

    /// Reverse pass. Accumulates `d(sum(output * upstream)) / d(params)` into
    /// `param_grad` and returns the gradient with respect to the input when
    /// `want_input_grad` is set.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
        param_grad: &mut [f64],
        want_input_grad: bool,
    ) -> Result<Option<Vec<f64>>> {
        let batch = cache.batch;
        if upstream.len() != batch * self.output_dim() {
            return Err(Error::Shape(format!(
                "upstream gradient of length {} is not {batch} x {}",
                upstream.len(),
                self.output_dim()
            )));
        }
        if param_grad.len() != self.params.len() {
            return Err(Error::Shape("parameter gradient buffer has wrong length".into()));
        }
        let mut grad = upstream.to_vec();
        for (li, span) in self.layers.iter().enumerate().rev() {
            let out = &cache.activations[li + 1];
            let x = &cache.activations[li];
            span.activation.backprop(out, &mut grad);

            // dW += x^T * grad
            let (w_grad, rest) = param_grad[span.offset..span.end()].split_at_mut(span.weight_len());
            gemm(
                span.inputs,
                batch,
                span.outputs,
                x,
                (1, span.inputs as isize),
                &grad,
                (span.outputs as isize, 1),
                1.0,
                w_grad,
            );
            for row in grad.chunks_exact(span.outputs) {
                for (b, g) in rest.iter_mut().zip(row) {
                    *b += g;
                }
            }

            if li == 0 && !want_input_grad {
                return Ok(None);
            }
            // grad_x = grad * W^T
            let w = &self.params[span.offset..span.bias_offset()];
            let mut gx = vec![0.0; batch * span.inputs];
            gemm(
                batch,
                span.outputs,
                span.inputs,
                &grad,
                (span.outputs as isize, 1),
                w,
                (1, span.outputs as isize),
                0.0,
                &mut gx,
            );
            grad = gx;
        }
        Ok(Some(grad))
    }

    /// Gradients for a single sample: `(parameter gradient, input gradient)`.
    pub fn gradients(&self, input: &[f64], upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let cache = self.forward_batch(input, 1)?;
        let mut pg = vec![0.0; self.params.len()];
        let gx = self
            .backward(&cache, upstream, &mut pg, true)?
            .expect("input gradient requested");
        Ok((pg, gx))
    }

    /// `self <- tau * source + (1 - tau) * self`.
    pub fn soft_update_from(&mut self, source: &Mlp, tau: f64) {
        debug_assert_eq!(self.params.len(), source.params.len());
        if tau == 1.0 {
            self.params.copy_from_slice(&source.params);
            return;
        }
        for (t, s) in self.params.iter_mut().zip(&source.params) {
            *t = tau * s + (1.0 - tau) * *t;
        }
    }
}
