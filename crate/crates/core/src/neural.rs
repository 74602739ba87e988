//! Dense feed-forward networks with manual backprop, inverted dropout, and
//! bias-corrected Adam.
//!
//! Everything is f64 and every random draw comes from a caller-provided seed,
//! so the same seed, architecture, and data produce bit-identical parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Elementwise activation applied by a layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    // Derivative in terms of the pre-activation. The relu subgradient at
    // exactly zero is taken as zero.
    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = sigmoid(pre);
                s * (1.0 - s)
            }
            Activation::Identity => 1.0,
        }
    }

    pub(crate) fn token(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Identity => "identity",
        }
    }

    pub(crate) fn from_token(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "identity" => Ok(Activation::Identity),
            other => Err(Error::ModelFormat(format!("unknown activation `{other}`"))),
        }
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Relative error used by gradient checks: |a-b| / max(|a|, |b|, 1e-8).
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / (a.abs().max(b.abs()).max(1e-8))
}

/// Hyperparameters shared by every network trained in this crate.
#[derive(Clone, Copy, Debug)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub hidden_size: usize,
    pub dropout: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { max_epochs: 1000, batch_size: 8, hidden_size: 16, dropout: 0.2, seed: 0 }
    }
}

/// One dense layer. Weights are row-major `out_dim x in_dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    pub(crate) weights: Vec<f64>,
    pub(crate) biases: Vec<f64>,
}

impl Layer {
    /// He-style uniform init: weights from U(-sqrt(6/fan_in), +sqrt(6/fan_in)),
    /// biases zero.
    fn init(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / in_dim as f64).sqrt();
        let weights = (0..in_dim * out_dim).map(|_| rng.gen_range(-limit..limit)).collect();
        Layer { in_dim, out_dim, activation, weights, biases: vec![0.0; out_dim] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }


    fn affine(&self, input: &[f64], pre: &mut Vec<f64>) {
        pre.clear();
        for j in 0..self.out_dim {
            let row = &self.weights[j * self.in_dim..(j + 1) * self.in_dim];
            let mut acc = self.biases[j];
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            pre.push(acc);
        }
    }
}

/// Per-layer parameter gradients, same shapes as the network.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub dw: Vec<Vec<f64>>,
    pub db: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Gradients {
            dw: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            db: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.dw.iter_mut().zip(&other.dw) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.db.iter_mut().zip(&other.db) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.dw.iter_mut().chain(self.db.iter_mut()) {
            for x in v {
                *x *= factor;
            }
        }
    }

    fn all_finite(&self) -> bool {
        self.dw.iter().chain(self.db.iter()).all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// Captured forward-pass state needed to backpropagate, including the exact
/// dropout masks that were applied.
pub struct ForwardTrace {
    layer_inputs: Vec<Vec<f64>>,
    pre_acts: Vec<Vec<f64>>,
    // masks[l] applies to the post-activation of layer l; None outside
    // training mode and on the output layer.
    masks: Vec<Option<Vec<f64>>>,
    pub output: Vec<f64>,
}

impl ForwardTrace {
    /// Pre-activation of the output layer (the logits for a sigmoid head).
    pub fn final_pre_activation(&self) -> &[f64] {
        self.pre_acts.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// A stack of dense layers with a single dropout rate on hidden activations.
#[derive(Clone, Debug)]
pub struct DenseNet {
    layers: Vec<Layer>,
    dropout_rate: f64,
    training: bool,
    rng: ChaCha8Rng,
}

impl DenseNet {
    /// `dims` lists layer widths input-first; `activations` has one entry per
    /// layer. Starts in inference mode.
    pub fn new(
        dims: &[usize],
        activations: &[Activation],
        dropout_rate: f64,
        seed: u64,
    ) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Config("a network needs at least one layer".into()));
        }
        if activations.len() != dims.len() - 1 {
            return Err(Error::Config(format!(
                "{} layer widths require {} activations, got {}",
                dims.len(),
                dims.len() - 1,
                activations.len()
            )));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::Config(format!("dropout rate {dropout_rate} outside [0, 1)")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .zip(activations)
            .map(|(pair, &act)| Layer::init(pair[0], pair[1], act, &mut rng))
            .collect();
        Ok(DenseNet { layers, dropout_rate, training: false, rng })
    }

    pub(crate) fn from_layers(layers: Vec<Layer>, dropout_rate: f64, seed: u64) -> Self {
        DenseNet { layers, dropout_rate, training: false, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }


    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    pub fn is_training(&self) -> bool {
        self.training
    }

    /// Toggle dropout. Inference mode applies no masks and no rescaling.
    pub fn set_training(&mut self, training: bool) {
        self.training = training;
    }

    /// Forward pass that may draw dropout masks (training mode only).
    pub fn forward(&mut self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_traced(input)?.output)
    }

    /// Inference-only forward pass; rejects training mode so no caller can
    /// silently depend on an unrecorded mask draw.
    pub fn infer(&self, input: &[f64]) -> Result<Vec<f64>> {
        if self.training {
            return Err(Error::Config("infer() requires inference mode".into()));
        }
        self.check_input(input)?;
        let mut cur = input.to_vec();
        let mut pre = Vec::new();
        for layer in &self.layers {
            layer.affine(&cur, &mut pre);
            cur.clear();
            cur.extend(pre.iter().map(|&z| layer.activation.apply(z)));
        }
        Ok(cur)
    }

    /// Forward pass recording everything backward() needs, including inverted
    /// dropout masks (kept units scaled by 1/(1-rate)) on hidden activations.
    pub fn forward_traced(&mut self, input: &[f64]) -> Result<ForwardTrace> {
        self.check_input(input)?;
        let last = self.layers.len() - 1;
        let mut layer_inputs = Vec::with_capacity(self.layers.len());
        let mut pre_acts = Vec::with_capacity(self.layers.len());
        let mut masks = Vec::with_capacity(self.layers.len());
        let mut cur = input.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut pre = Vec::new();
            layer.affine(&cur, &mut pre);
            layer_inputs.push(std::mem::take(&mut cur));
            let mut post: Vec<f64> = pre.iter().map(|&z| layer.activation.apply(z)).collect();
            pre_acts.push(pre);
            let mask = if self.training && self.dropout_rate > 0.0 && l < last {
                let keep = 1.0 - self.dropout_rate;
                let m: Vec<f64> = (0..post.len())
                    .map(|_| if self.rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                    .collect();
                for (p, f) in post.iter_mut().zip(&m) {
                    *p *= f;
                }
                Some(m)
            } else {
                None
            };
            masks.push(mask);
            cur = post;
        }
        Ok(ForwardTrace { layer_inputs, pre_acts, masks, output: cur })
    }

    /// Backpropagate `dloss_dout` (gradient of the loss in the network
    /// output) through the recorded trace. Returns parameter gradients plus
    /// the gradient with respect to the network input.
    pub fn backward(&self, trace: &ForwardTrace, dloss_dout: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        if dloss_dout.len() != self.output_dim() {
            return Err(Error::Shape(format!(
                "loss gradient has {} entries, output has {}",
                dloss_dout.len(),
                self.output_dim()
            )));
        }
        let mut grads = Gradients::zeros_like(self);
        let mut delta = dloss_dout.to_vec();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &trace.layer_inputs[l];
            let pre = &trace.pre_acts[l];
            // d(loss)/d(pre-activation)
            let d_pre: Vec<f64> = delta
                .iter()
                .zip(pre)
                .map(|(&d, &z)| d * layer.activation.derivative(z))
                .collect();
            for j in 0..layer.out_dim {
                let row = &mut grads.dw[l][j * layer.in_dim..(j + 1) * layer.in_dim];
                for (g, x) in row.iter_mut().zip(input) {
                    *g += d_pre[j] * x;
                }
                grads.db[l][j] += d_pre[j];
            }
            let mut d_input = vec![0.0; layer.in_dim];
            for j in 0..layer.out_dim {
                let row = &layer.weights[j * layer.in_dim..(j + 1) * layer.in_dim];
                for (di, w) in d_input.iter_mut().zip(row) {
                    *di += w * d_pre[j];
                }
            }
            // The recorded input already includes the previous layer's mask,
            // so the chain rule needs the same mask factor here.
            if l > 0 {
                if let Some(mask) = &trace.masks[l - 1] {
                    for (di, m) in d_input.iter_mut().zip(mask) {
                        *di *= m;
                    }
                }
            }
            delta = d_input;
        }
        Ok((grads, delta))
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} entries, network expects {}",
                input.len(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    // Canonical parameter order used by gradient checking: per layer, all
    // weights row-major, then all biases.
    fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    fn get_param(&self, mut idx: usize) -> f64 {
        for layer in &self.layers {
            if idx < layer.weights.len() {
                return layer.weights[idx];
            }
            idx -= layer.weights.len();
            if idx < layer.biases.len() {
                return layer.biases[idx];
            }
            idx -= layer.biases.len();
        }
        unreachable!("parameter index out of range")
    }

    fn set_param(&mut self, mut idx: usize, value: f64) {
        for layer in &mut self.layers {
            if idx < layer.weights.len() {
                layer.weights[idx] = value;
                return;
            }
            idx -= layer.weights.len();
            if idx < layer.biases.len() {
                layer.biases[idx] = value;
                return;
            }
            idx -= layer.biases.len();
        }
        unreachable!("parameter index out of range")
    }

    fn grad_param(grads: &Gradients, mut idx: usize) -> f64 {
        for (dw, db) in grads.dw.iter().zip(&grads.db) {
            if idx < dw.len() {
                return dw[idx];
            }
            idx -= dw.len();
            if idx < db.len() {
                return db[idx];
            }
            idx -= db.len();
        }
        unreachable!("parameter index out of range")
    }
}

/// Adam optimizer state: first/second moment estimates per parameter plus the
/// shared step counter used for bias correction.
#[derive(Clone, Debug)]
pub struct AdamState {
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
    step: u64,
    pub learn_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(net: &DenseNet, learn_rate: f64) -> Self {
        let zw: Vec<Vec<f64>> = net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect();
        let zb: Vec<Vec<f64>> = net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect();
        AdamState {
            m_w: zw.clone(),
            v_w: zw,
            m_b: zb.clone(),
            v_b: zb,
            step: 0,
            learn_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam step over every parameter.
    pub fn update(&mut self, net: &mut DenseNet, grads: &Gradients) -> Result<()> {
        if !grads.all_finite() {
            return Err(Error::Divergence("non-finite gradient in Adam update".into()));
        }
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.beta2.powi(self.step as i32);
        for (l, layer) in net.layers.iter_mut().enumerate() {
            Self::update_slice(
                &mut layer.weights,
                &grads.dw[l],
                &mut self.m_w[l],
                &mut self.v_w[l],
                self.learn_rate,
                self.beta1,
                self.beta2,
                self.epsilon,
                c1,
                c2,
            );
            Self::update_slice(
                &mut layer.biases,
                &grads.db[l],
                &mut self.m_b[l],
                &mut self.v_b[l],
                self.learn_rate,
                self.beta1,
                self.beta2,
                self.epsilon,
                c1,
                c2,
            );
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn update_slice(
        params: &mut [f64],
        grads: &[f64],
        m: &mut [f64],
        v: &mut [f64],
        lr: f64,
        b1: f64,
        b2: f64,
        eps: f64,
        c1: f64,
        c2: f64,
    ) {
        for i in 0..params.len() {
            let g = grads[i];
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

/// Compare analytic gradients against central finite differences for a
/// scalar loss over the network output. Returns the worst relative error.
/// Requires inference mode so both sides see the same deterministic function.
pub fn grad_check<L, G>(net: &mut DenseNet, input: &[f64], loss: L, loss_grad: G) -> Result<f64>
where
    L: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    if net.is_training() {
        return Err(Error::Config("gradient check requires dropout disabled".into()));
    }
    let trace = net.forward_traced(input)?;
    let dloss = loss_grad(&trace.output);
    let (grads, _) = net.backward(&trace, &dloss)?;

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for idx in 0..net.param_count() {
        let original = net.get_param(idx);
        net.set_param(idx, original + h);
        let up = loss(&net.infer(input)?);
        net.set_param(idx, original - h);
        let down = loss(&net.infer(input)?);
        net.set_param(idx, original);
        let numeric = (up - down) / (2.0 * h);
        let analytic = DenseNet::grad_param(&grads, idx);
        worst = worst.max(relative_error(analytic, numeric));
    }
    Ok(worst)
}
