//! From-scratch multilayer perceptron with SGD training.
//!
//! Layers compute an affine projection followed by a pointwise
//! nonlinearity. Training minimizes the mean squared error on one active
//! output per sample (the other outputs' errors are masked to zero), with
//! minibatch SGD, a seeded validation split, and early stopping on the
//! validation error.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{EncodedSample, TargetKind};
use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Logistic,
}

impl Activation {
    pub fn apply<F: Real>(self, x: F) -> F {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => {
                if x > F::zero() {
                    x
                } else {
                    F::zero()
                }
            }
            Activation::Logistic => F::one() / (F::one() + (-x).exp()),
        }
    }

    /// Derivative from the cached pre-activation and output value.
    fn derivative<F: Real>(self, pre: F, post: F) -> F {
        match self {
            Activation::Tanh => F::one() - post * post,
            Activation::Relu => {
                if pre > F::zero() {
                    F::one()
                } else {
                    F::zero()
                }
            }
            Activation::Logistic => post * (F::one() - post),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
            Activation::Logistic => "logistic",
        }
    }

    pub fn parse(name: &str) -> Result<Activation> {
        match name.to_ascii_lowercase().as_str() {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            "logistic" | "sigmoid" => Ok(Activation::Logistic),
            other => Err(Error::invalid(format!(
                "unknown activation `{other}`; valid: tanh, relu, logistic"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer<F> {
    /// Row-major `out_dim x in_dim`.
    pub weights: Vec<F>,
    pub biases: Vec<F>,
    pub activation: Activation,
    pub in_dim: usize,
    pub out_dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<F> {
    pub layers: Vec<Layer<F>>,
}

/// Per-layer parameter gradients, same shapes as the layers.
pub struct Gradients<F> {
    pub dw: Vec<Vec<F>>,
    pub db: Vec<Vec<F>>,
}

/// Reusable forward/backward buffers sized to one network.
pub struct Workspace<F> {
    /// activations[0] is the input; activations[l+1] the output of layer l.
    activations: Vec<Vec<F>>,
    preacts: Vec<Vec<F>>,
    delta: Vec<F>,
    delta_next: Vec<F>,
}

impl<F: Real> Mlp<F> {
    /// Seeded Glorot-uniform initialization: weights uniform in
    /// `±sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn init(
        dims: &[usize],
        hidden_activation: Activation,
        output_activation: Activation,
        seed: u64,
    ) -> Result<Mlp<F>> {
        if dims.len() < 2 {
            return Err(Error::invalid("need at least input and output dims"));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::invalid("zero-width layer"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (l, pair) in dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weights = (0..fan_in * fan_out)
                .map(|_| F::from_f64_lossy(rng.random_range(-limit..limit)))
                .collect();
            layers.push(Layer {
                weights,
                biases: vec![F::zero(); fan_out],
                activation: if l + 2 == dims.len() {
                    output_activation
                } else {
                    hidden_activation
                },
                in_dim: fan_in,
                out_dim: fan_out,
            });
        }
        Ok(Mlp { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.in_dim)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim)
    }

    pub fn workspace(&self) -> Workspace<F> {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(vec![F::zero(); self.input_dim()]);
        let mut preacts = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            activations.push(vec![F::zero(); layer.out_dim]);
            preacts.push(vec![F::zero(); layer.out_dim]);
        }
        let widest = self
            .layers
            .iter()
            .map(|l| l.in_dim.max(l.out_dim))
            .max()
            .unwrap_or(0);
        Workspace {
            activations,
            preacts,
            delta: vec![F::zero(); widest],
            delta_next: vec![F::zero(); widest],
        }
    }

    pub fn zero_gradients(&self) -> Gradients<F> {
        Gradients {
            dw: self
                .layers
                .iter()
                .map(|l| vec![F::zero(); l.weights.len()])
                .collect(),
            db: self.layers.iter().map(|l| vec![F::zero(); l.out_dim]).collect(),
        }
    }

    /// Sequential layer application.
    pub fn forward(&self, x: &[F]) -> Result<Vec<F>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut ws = self.workspace();
        self.forward_cached(x, &mut ws);
        Ok(ws.activations.last().expect("nonempty network").clone())
    }

    /// Forward pass caching activations and pre-activations for backprop.
    pub fn forward_cached(&self, x: &[F], ws: &mut Workspace<F>) {
        ws.activations[0].copy_from_slice(x);
        for (l, layer) in self.layers.iter().enumerate() {
            let (before, after) = ws.activations.split_at_mut(l + 1);
            let input = &before[l];
            let output = &mut after[0];
            let pre = &mut ws.preacts[l];
            for o in 0..layer.out_dim {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                let mut acc = layer.biases[o];
                for (w, &xi) in row.iter().zip(input.iter()) {
                    acc += *w * xi;
                }
                pre[o] = acc;
                output[o] = layer.activation.apply(acc);
            }
        }
    }

    /// Output of the last forward pass held in the workspace.
    pub fn cached_output<'a>(&self, ws: &'a Workspace<F>) -> &'a [F] {
        ws.activations.last().expect("nonempty network")
    }

    /// Backpropagates `output_grad` (the gradient of the loss with respect
    /// to the network output) through the cached pass, accumulating
    /// parameter gradients into `grads` and returning the gradient with
    /// respect to the network input.
    pub fn backward(
        &self,
        ws: &mut Workspace<F>,
        output_grad: &[F],
        grads: Option<&mut Gradients<F>>,
    ) -> Vec<F> {
        let mut grads = grads;
        ws.delta[..output_grad.len()].copy_from_slice(output_grad);
        for (l, layer) in self.layers.iter().enumerate().rev() {
            // post-activation gradient -> pre-activation gradient
            for o in 0..layer.out_dim {
                let d = layer
                    .activation
                    .derivative(ws.preacts[l][o], ws.activations[l + 1][o]);
                ws.delta[o] *= d;
            }
            if let Some(g) = grads.as_deref_mut() {
                let input = &ws.activations[l];
                let dw = &mut g.dw[l];
                let db = &mut g.db[l];
                for o in 0..layer.out_dim {
                    let d = ws.delta[o];
                    if d == F::zero() {
                        continue;
                    }
                    let row = &mut dw[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (slot, &xi) in row.iter_mut().zip(input.iter()) {
                        *slot += d * xi;
                    }
                    db[o] += d;
                }
            }
            // gradient with respect to this layer's input
            for slot in ws.delta_next[..layer.in_dim].iter_mut() {
                *slot = F::zero();
            }
            for o in 0..layer.out_dim {
                let d = ws.delta[o];
                if d == F::zero() {
                    continue;
                }
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (slot, &w) in ws.delta_next[..layer.in_dim].iter_mut().zip(row.iter()) {
                    *slot += d * w;
                }
            }
            std::mem::swap(&mut ws.delta, &mut ws.delta_next);
        }
        ws.delta[..self.input_dim()].to_vec()
    }

    fn sgd_step(&mut self, grads: &Gradients<F>, learning_rate: F) {
        for (layer, (dw, db)) in self
            .layers
            .iter_mut()
            .zip(grads.dw.iter().zip(grads.db.iter()))
        {
            for (w, g) in layer.weights.iter_mut().zip(dw.iter()) {
                *w -= learning_rate * *g;
            }
            for (b, g) in layer.biases.iter_mut().zip(db.iter()) {
                *b -= learning_rate * *g;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub minibatch: usize,
    pub max_epochs: usize,
    pub patience_epochs: usize,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            minibatch: 100,
            max_epochs: 100,
            patience_epochs: 5,
            validation_fraction: 0.10,
            seed: 0,
        }
    }
}

/// Post-epoch errors; `epoch` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

/// Mean squared error on the active outputs.
pub fn masked_mse<F: Real>(model: &Mlp<F>, samples: &[&EncodedSample<F>]) -> F {
    let mut ws = model.workspace();
    let mut acc = F::zero();
    let mut x = vec![F::zero(); model.input_dim()];
    for sample in samples {
        encode_input(&sample.x, &mut x);
        model.forward_cached(&x, &mut ws);
        let out = model.cached_output(&ws)[sample.active_output as usize];
        let err = out - sample.target;
        acc += err * err;
    }
    acc / F::from_usize_lossy(samples.len().max(1))
}

/// Ranks feed the network as raw values, without normalization.
pub fn encode_input<F: Real>(ranks: &[u8], out: &mut [F]) {
    for (slot, &r) in out.iter_mut().zip(ranks.iter()) {
        *slot = F::from_usize_lossy(r as usize);
    }
}

/// Minibatch SGD with a seeded validation split and early stopping.
///
/// Returns the parameters from the best validation epoch plus the per-epoch
/// error history. Training stops at `max_epochs` or once the validation MSE
/// has not strictly improved for `patience_epochs` consecutive epochs.
pub fn train<F: Real>(
    model: Mlp<F>,
    data: &[EncodedSample<F>],
    cfg: &TrainConfig,
) -> Result<(Mlp<F>, Vec<EpochStats>)> {
    if data.is_empty() {
        return Err(Error::invalid("empty training data"));
    }
    if !(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0) {
        return Err(Error::invalid("validation fraction must lie in (0, 1)"));
    }
    if (data.len() as f64) < 10.0 / cfg.validation_fraction {
        return Err(Error::invalid(format!(
            "need at least {} samples for a {} validation split",
            (10.0 / cfg.validation_fraction).ceil(),
            cfg.validation_fraction
        )));
    }
    if cfg.minibatch == 0 || cfg.max_epochs == 0 {
        return Err(Error::invalid("minibatch and max_epochs must be positive"));
    }
    for sample in data {
        if sample.x.len() != model.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: model.input_dim(),
                got: sample.x.len(),
            });
        }
        if sample.active_output as usize >= model.output_dim() {
            return Err(Error::invalid("active output outside network"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut indices: Vec<usize> = (0..data.len()).collect();
    for i in (1..indices.len()).rev() {
        let j = rng.random_range(0..=i);
        indices.swap(i, j);
    }
    let n_val = ((data.len() as f64 * cfg.validation_fraction).round() as usize).max(1);
    let (val_idx, train_idx) = indices.split_at(n_val);
    let val_set: Vec<&EncodedSample<F>> = val_idx.iter().map(|&i| &data[i]).collect();
    let train_set: Vec<&EncodedSample<F>> = train_idx.iter().map(|&i| &data[i]).collect();

    let mut model = model;
    let mut ws = model.workspace();
    let mut grads = model.zero_gradients();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let lr = F::from_f64_lossy(cfg.learning_rate);
    let mut x = vec![F::zero(); model.input_dim()];
    let mut output_grad = vec![F::zero(); model.output_dim()];

    let mut history = Vec::new();
    let mut best_val = F::infinity();
    let mut best_model = model.clone();
    let mut streak = 0usize;

    for epoch in 1..=cfg.max_epochs {
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        for batch in order.chunks(cfg.minibatch) {
            for g in grads.dw.iter_mut().chain(grads.db.iter_mut()) {
                for slot in g.iter_mut() {
                    *slot = F::zero();
                }
            }
            let scale = F::one() / F::from_usize_lossy(batch.len());
            let mut batch_loss = F::zero();
            for &bi in batch {
                let sample = train_set[bi];
                encode_input(&sample.x, &mut x);
                model.forward_cached(&x, &mut ws);
                let active = sample.active_output as usize;
                let err = model.cached_output(&ws)[active] - sample.target;
                batch_loss += err * err * scale / (F::one() + F::one());
                for slot in output_grad.iter_mut() {
                    *slot = F::zero();
                }
                output_grad[active] = err * scale;
                model.backward(&mut ws, &output_grad, Some(&mut grads));
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    loss: batch_loss.to_f64_lossy(),
                });
            }
            model.sgd_step(&grads, lr);
        }

        let train_mse = masked_mse(&model, &train_set);
        let val_mse = masked_mse(&model, &val_set);
        if !val_mse.is_finite() || !train_mse.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                loss: val_mse.to_f64_lossy(),
            });
        }
        history.push(EpochStats {
            epoch,
            train_mse: train_mse.to_f64_lossy(),
            val_mse: val_mse.to_f64_lossy(),
        });
        if val_mse < best_val {
            best_val = val_mse;
            best_model = model.clone();
            streak = 0;
        } else {
            streak += 1;
            if streak >= cfg.patience_epochs {
                break;
            }
        }
    }
    Ok((best_model, history))
}

/// Best validation MSE reached in a history.
pub fn best_val_mse(history: &[EpochStats]) -> f64 {
    history
        .iter()
        .map(|s| s.val_mse)
        .fold(f64::INFINITY, f64::min)
}

/// Serialized surrogate: network weights plus the sweep metadata the
/// configuration search needs (frequency set, pin count, target).
#[derive(Serialize, Deserialize)]
pub struct Checkpoint {
    pub pin_count: usize,
    pub frequency_set: Vec<f64>,
    pub target: TargetKind,
    pub layers: Vec<CheckpointLayer>,
}

#[derive(Serialize, Deserialize)]
pub struct CheckpointLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
    /// Row-major `out_dim` rows of `in_dim` weights.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl Checkpoint {
    pub fn from_model<F: Real>(
        model: &Mlp<F>,
        pin_count: usize,
        frequency_set: Vec<f64>,
        target: TargetKind,
    ) -> Checkpoint {
        Checkpoint {
            pin_count,
            frequency_set,
            target,
            layers: model
                .layers
                .iter()
                .map(|l| CheckpointLayer {
                    in_dim: l.in_dim,
                    out_dim: l.out_dim,
                    activation: l.activation,
                    weights: l
                        .weights
                        .chunks(l.in_dim)
                        .map(|row| row.iter().map(|w| w.to_f64_lossy()).collect())
                        .collect(),
                    biases: l.biases.iter().map(|b| b.to_f64_lossy()).collect(),
                })
                .collect(),
        }
    }

    pub fn to_model<F: Real>(&self) -> Result<Mlp<F>> {
        let mut layers = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            if l.weights.len() != l.out_dim || l.weights.iter().any(|r| r.len() != l.in_dim) {
                return Err(Error::invalid("checkpoint layer shape mismatch"));
            }
            if l.biases.len() != l.out_dim {
                return Err(Error::invalid("checkpoint bias shape mismatch"));
            }
            layers.push(Layer {
                weights: l
                    .weights
                    .iter()
                    .flatten()
                    .map(|&w| F::from_f64_lossy(w))
                    .collect(),
                biases: l.biases.iter().map(|&b| F::from_f64_lossy(b)).collect(),
                activation: l.activation,
                in_dim: l.in_dim,
                out_dim: l.out_dim,
            });
        }
        let model = Mlp { layers };
        for pair in model.layers.windows(2) {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::invalid("checkpoint layers do not compose"));
            }
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
