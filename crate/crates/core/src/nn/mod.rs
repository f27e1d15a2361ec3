//! From-scratch feed-forward regressors: He initialisation, ReLU hidden
//! layers with inverted dropout, L1 loss, backpropagation, and Adam.
//!
//! Training is deterministic for a fixed seed: weight draws, epoch
//! shuffles, and dropout masks all come from one seeded generator owned by
//! the model.

mod storage;
mod train;

pub use storage::{load_model, save_model};
pub use train::{train, ChannelSamples, GridDataset, GridScore, TrainHistory};
pub use train::grid_search;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: expected input of length {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite gradient encountered; training step aborted")]
    NonFiniteGradient,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("geometry grid is empty")]
    EmptyGrid,
    #[error("unsupported model format version: {0}")]
    UnsupportedVersion(String),
    #[error("corrupt model payload: {0}")]
    CorruptPayload(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    Mae,
}

/// Network geometry and training hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub input_size: usize,
    pub hidden_sizes: Vec<usize>,
    pub output_size: usize,
    pub dropout_rate: f64,
    pub activation: Activation,
    pub loss: Loss,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    /// Shipped defaults: a five-day lag window feeding two 150-neuron
    /// hidden layers, 20% dropout, Adam at 1e-3 with batches of five.
    fn default() -> Self {
        Self {
            input_size: 5,
            hidden_sizes: vec![150, 150],
            output_size: 1,
            dropout_rate: 0.2,
            activation: Activation::Relu,
            loss: Loss::Mae,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            batch_size: 5,
            max_epochs: 500,
            patience: 50,
            seed: 42,
        }
    }
}

/// One supervised pair on whatever scale the caller works in.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `out_dim x in_dim`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct AdamState {
    pub m_weights: Vec<Vec<f64>>,
    pub v_weights: Vec<Vec<f64>>,
    pub m_biases: Vec<Vec<f64>>,
    pub v_biases: Vec<Vec<f64>>,
    pub step: u64,
}

impl AdamState {
    fn zeros_like(layers: &[DenseLayer]) -> Self {
        Self {
            m_weights: layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            v_weights: layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            m_biases: layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
            v_biases: layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
            step: 0,
        }
    }
}

/// A feed-forward regressor with its optimiser state and the min/max
/// scalers fitted on its training slice.
#[derive(Debug, Clone)]
pub struct MlpModel {
    pub config: MlpConfig,
    pub(crate) layers: Vec<DenseLayer>,
    pub(crate) adam: AdamState,
    /// Per input position `(min, max)` on the raw scale.
    pub input_scaler: Vec<(f64, f64)>,
    /// Target `(min, max)` on the raw scale.
    pub target_scaler: (f64, f64),
    pub(crate) rng: ChaCha20Rng,
}

/// Intermediate values of one training-mode forward pass, retained for
/// backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input vector fed to each affine layer (post-dropout for hidden).
    layer_inputs: Vec<Vec<f64>>,
    /// Pre-activation of each hidden layer.
    pre_activations: Vec<Vec<f64>>,
    /// Inverted-dropout mask per hidden layer (scaled by 1/keep), if any.
    masks: Vec<Option<Vec<f64>>>,
}

impl ForwardCache {
    pub fn pre_activations(&self) -> &[Vec<f64>] {
        &self.pre_activations
    }
}

/// Accumulated parameter gradients for one batch.
#[derive(Debug, Clone)]
pub(crate) struct Gradients {
    pub d_weights: Vec<Vec<f64>>,
    pub d_biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub(crate) fn zeros_like(layers: &[DenseLayer]) -> Self {
        Self {
            d_weights: layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            d_biases: layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }
}

/// He-initialised model: weights drawn N(0, sqrt(2 / fan_in)), biases zero.
pub fn init_mlp(config: MlpConfig) -> Result<MlpModel, NnError> {
    if config.input_size == 0 {
        return Err(NnError::InvalidConfig("input_size must be at least 1".into()));
    }
    if config.output_size != 1 {
        return Err(NnError::InvalidConfig("output_size must be 1".into()));
    }
    if !(0.0..1.0).contains(&config.dropout_rate) {
        return Err(NnError::InvalidConfig("dropout_rate must be in [0, 1)".into()));
    }
    if config.batch_size == 0 {
        return Err(NnError::InvalidConfig("batch_size must be at least 1".into()));
    }
    if config.hidden_sizes.iter().any(|&h| h == 0) {
        return Err(NnError::InvalidConfig("hidden layer sizes must be positive".into()));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut dims = vec![config.input_size];
    dims.extend(&config.hidden_sizes);
    dims.push(config.output_size);

    let mut layers = Vec::with_capacity(dims.len() - 1);
    for pair in dims.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).unwrap();
        let weights = (0..fan_in * fan_out).map(|_| normal.sample(&mut rng)).collect();
        layers.push(DenseLayer {
            in_dim: fan_in,
            out_dim: fan_out,
            weights,
            biases: vec![0.0; fan_out],
        });
    }

    let adam = AdamState::zeros_like(&layers);
    let input_scaler = vec![(0.0, 1.0); config.input_size];
    Ok(MlpModel {
        config,
        layers,
        adam,
        input_scaler,
        target_scaler: (0.0, 1.0),
        rng,
    })
}

/// Mean absolute error of one prediction.
pub fn loss_mae(predicted: f64, actual: f64) -> f64 {
    (predicted - actual).abs()
}

fn affine(layer: &DenseLayer, input: &[f64], out: &mut Vec<f64>) {
    out.clear();
    for o in 0..layer.out_dim {
        let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
        let mut acc = layer.biases[o];
        for (w, x) in row.iter().zip(input) {
            acc += w * x;
        }
        out.push(acc);
    }
}

impl MlpModel {
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(|l| (l.in_dim, l.out_dim)).collect()
    }

    pub(crate) fn check_input(&self, input: &[f64]) -> Result<(), NnError> {
        if input.len() != self.config.input_size {
            return Err(NnError::ShapeMismatch {
                expected: self.config.input_size,
                got: input.len(),
            });
        }
        Ok(())
    }

    /// Evaluation-mode forward pass. Inverted dropout means no rescaling is
    /// needed here; the pass is a pure function of weights and input.
    pub fn predict_scaled(&self, input: &[f64]) -> Result<f64, NnError> {
        self.check_input(input)?;
        let n_hidden = self.layers.len() - 1;
        let mut a = input.to_vec();
        let mut z = Vec::new();
        for layer in &self.layers[..n_hidden] {
            affine(layer, &a, &mut z);
            a.clear();
            a.extend(z.iter().map(|&v| v.max(0.0)));
        }
        affine(&self.layers[n_hidden], &a, &mut z);
        Ok(z[0])
    }

    /// Forward pass returning the cache needed for backpropagation.
    /// In training mode dropout masks are drawn from the model generator.
    pub fn forward(&mut self, input: &[f64], train_mode: bool) -> Result<(f64, ForwardCache), NnError> {
        self.check_input(input)?;
        let n_hidden = self.layers.len() - 1;
        let keep = 1.0 - self.config.dropout_rate;
        let use_dropout = train_mode && self.config.dropout_rate > 0.0;

        let mut layer_inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(n_hidden);
        let mut masks = Vec::with_capacity(n_hidden);

        let mut a = input.to_vec();
        for layer in &self.layers[..n_hidden] {
            layer_inputs.push(a.clone());
            let mut z = Vec::new();
            affine(layer, &a, &mut z);
            let mut activated: Vec<f64> = z.iter().map(|&v| v.max(0.0)).collect();
            pre_activations.push(z);
            if use_dropout {
                let mask: Vec<f64> = (0..activated.len())
                    .map(|_| {
                        if self.rng.gen::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    })
                    .collect();
                for (v, m) in activated.iter_mut().zip(&mask) {
                    *v *= m;
                }
                masks.push(Some(mask));
            } else {
                masks.push(None);
            }
            a = activated;
        }
        layer_inputs.push(a.clone());
        let mut out = Vec::new();
        affine(&self.layers[n_hidden], &a, &mut out);

        Ok((
            out[0],
            ForwardCache {
                layer_inputs,
                pre_activations,
                masks,
            },
        ))
    }

    /// Backpropagates `d_output` (dL/dy for this sample) into `grads`.
    pub(crate) fn accumulate_gradients(
        &self,
        cache: &ForwardCache,
        d_output: f64,
        grads: &mut Gradients,
    ) {
        let n_layers = self.layers.len();
        let mut delta = vec![d_output];
        for li in (0..n_layers).rev() {
            let layer = &self.layers[li];
            let input = &cache.layer_inputs[li];
            let dw = &mut grads.d_weights[li];
            let db = &mut grads.d_biases[li];
            let mut d_input = vec![0.0; layer.in_dim];
            for o in 0..layer.out_dim {
                let d = delta[o];
                if d != 0.0 {
                    let row = o * layer.in_dim;
                    for i in 0..layer.in_dim {
                        dw[row + i] += d * input[i];
                        d_input[i] += d * layer.weights[row + i];
                    }
                    db[o] += d;
                }
            }
            if li > 0 {
                // Through dropout then the ReLU gate of the layer below.
                let hidden = li - 1;
                if let Some(mask) = &cache.masks[hidden] {
                    for (v, m) in d_input.iter_mut().zip(mask) {
                        *v *= m;
                    }
                }
                for (v, &z) in d_input.iter_mut().zip(&cache.pre_activations[hidden]) {
                    if z <= 0.0 {
                        *v = 0.0;
                    }
                }
                delta = d_input;
            }
        }
    }

    pub(crate) fn adam_update(&mut self, grads: &Gradients) {
        self.adam.step += 1;
        let t = self.adam.step as f64;
        let (b1, b2) = (self.config.adam_beta1, self.config.adam_beta2);
        let lr = self.config.learning_rate;
        let eps = self.config.adam_epsilon;
        let bc1 = 1.0 - b1.powf(t);
        let bc2 = 1.0 - b2.powf(t);
        for li in 0..self.layers.len() {
            let layer = &mut self.layers[li];
            for (i, g) in grads.d_weights[li].iter().enumerate() {
                let m = &mut self.adam.m_weights[li][i];
                let v = &mut self.adam.v_weights[li][i];
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                layer.weights[i] -= lr * (*m / bc1) / ((*v / bc2).sqrt() + eps);
            }
            for (i, g) in grads.d_biases[li].iter().enumerate() {
                let m = &mut self.adam.m_biases[li][i];
                let v = &mut self.adam.v_biases[li][i];
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                layer.biases[i] -= lr * (*m / bc1) / ((*v / bc2).sqrt() + eps);
            }
        }
    }

    /// One optimisation step on a mini-batch of scaled samples. Returns the
    /// batch L1 loss measured before the update.
    pub fn train_step(&mut self, batch: &[Sample]) -> Result<f64, NnError> {
        if batch.is_empty() {
            return Err(NnError::EmptyDataset);
        }
        let mut grads = Gradients::zeros_like(&self.layers);
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for sample in batch {
            let (pred, cache) = self.forward(&sample.input, true)?;
            loss += loss_mae(pred, sample.target);
            // L1 subgradient, defined as 0 at exact equality.
            let d_output = scale * (pred - sample.target).signum_or_zero();
            self.accumulate_gradients(&cache, d_output, &mut grads);
        }
        let finite = grads
            .d_weights
            .iter()
            .chain(grads.d_biases.iter())
            .all(|g| g.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(NnError::NonFiniteGradient);
        }
        self.adam_update(&grads);
        Ok(loss * scale)
    }

    /// Fits the min/max scalers from raw-scale samples.
    pub fn fit_scalers(&mut self, samples: &[Sample]) -> Result<(), NnError> {
        if samples.is_empty() {
            return Err(NnError::EmptyDataset);
        }
        let d = self.config.input_size;
        let mut scaler = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
        let mut t_min = f64::INFINITY;
        let mut t_max = f64::NEG_INFINITY;
        for s in samples {
            self.check_input(&s.input)?;
            for (i, &v) in s.input.iter().enumerate() {
                scaler[i].0 = scaler[i].0.min(v);
                scaler[i].1 = scaler[i].1.max(v);
            }
            t_min = t_min.min(s.target);
            t_max = t_max.max(s.target);
        }
        self.input_scaler = scaler;
        self.target_scaler = (t_min, t_max);
        Ok(())
    }

    pub fn scale_input(&self, raw: &[f64]) -> Result<Vec<f64>, NnError> {
        self.check_input(raw)?;
        Ok(raw
            .iter()
            .zip(&self.input_scaler)
            .map(|(&v, &(lo, hi))| minmax_scale(v, lo, hi))
            .collect())
    }

    pub fn scale_target(&self, raw: f64) -> f64 {
        minmax_scale(raw, self.target_scaler.0, self.target_scaler.1)
    }

    pub fn unscale_target(&self, scaled: f64) -> f64 {
        let (lo, hi) = self.target_scaler;
        if hi > lo {
            lo + scaled * (hi - lo)
        } else {
            lo
        }
    }

    /// Scales a raw-space sample set into model space.
    pub fn scale_samples(&self, samples: &[Sample]) -> Result<Vec<Sample>, NnError> {
        samples
            .iter()
            .map(|s| {
                Ok(Sample {
                    input: self.scale_input(&s.input)?,
                    target: self.scale_target(s.target),
                })
            })
            .collect()
    }

    /// Predicts the next raw-scale value from a raw-scale lag window.
    pub fn predict_raw(&self, window: &[f64]) -> Result<f64, NnError> {
        let scaled = self.scale_input(window)?;
        let out = self.predict_scaled(&scaled)?;
        Ok(self.unscale_target(out))
    }
}

fn minmax_scale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

trait SignumOrZero {
    fn signum_or_zero(self) -> f64;
}

impl SignumOrZero for f64 {
    fn signum_or_zero(self) -> f64 {
        if self > 0.0 {
            1.0
        } else if self < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests;
