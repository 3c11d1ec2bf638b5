//! Single-hidden-layer perceptron regressor.
//!
//! `ŷ = w_out · tanh(W_in x + b_hidden) + b_out`, trained on batch MSE with
//! full-batch momentum descent and validation early stopping. The model that
//! is returned is the snapshot with the lowest validation MSE, not the last.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{NormalizedSet, INPUT_COUNT};
use crate::{Error, Predictor, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    hidden: usize,
    /// H×5, row-major: row h holds the weights into hidden unit h.
    input_weights: Vec<f64>,
    hidden_biases: Vec<f64>,
    output_weights: Vec<f64>,
    output_bias: f64,
}

/// Gradient of batch MSE, laid out like [`MlpModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradient {
    pub input_weights: Vec<f64>,
    pub hidden_biases: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

impl MlpGradient {
    fn zeros(hidden: usize) -> Self {
        MlpGradient {
            input_weights: vec![0.0; hidden * INPUT_COUNT],
            hidden_biases: vec![0.0; hidden],
            output_weights: vec![0.0; hidden],
            output_bias: 0.0,
        }
    }

    /// Same ordering as [`MlpModel::to_flat`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.input_weights.len() + 2 * self.hidden_biases.len() + 1);
        v.extend_from_slice(&self.input_weights);
        v.extend_from_slice(&self.hidden_biases);
        v.extend_from_slice(&self.output_weights);
        v.push(self.output_bias);
        v
    }
}

impl MlpModel {
    pub fn new(
        input_weights: Vec<f64>,
        hidden_biases: Vec<f64>,
        output_weights: Vec<f64>,
        output_bias: f64,
    ) -> Result<Self> {
        let hidden = hidden_biases.len();
        if hidden == 0 {
            return Err(Error::invalid("an MLP needs at least one hidden unit"));
        }
        if input_weights.len() != hidden * INPUT_COUNT || output_weights.len() != hidden {
            return Err(Error::invalid(format!(
                "parameter shapes do not match {hidden} hidden units"
            )));
        }
        let model = MlpModel { hidden, input_weights, hidden_biases, output_weights, output_bias };
        if model.to_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("MLP parameters must be finite"));
        }
        Ok(model)
    }

    pub fn zeros(hidden: usize) -> Result<Self> {
        MlpModel::new(
            vec![0.0; hidden * INPUT_COUNT],
            vec![0.0; hidden],
            vec![0.0; hidden],
            0.0,
        )
    }

    /// Uniform weights in ±init_scale/√fan_in, zero biases.
    pub fn init(seed: u64, hidden: usize, init_scale: f64) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::invalid("hidden unit count must be at least 1"));
        }
        if !(init_scale.is_finite() && init_scale > 0.0) {
            return Err(Error::invalid("init_scale must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let in_bound = init_scale / (INPUT_COUNT as f64).sqrt();
        let out_bound = init_scale / (hidden as f64).sqrt();
        let input_weights = (0..hidden * INPUT_COUNT)
            .map(|_| rng.random_range(-in_bound..=in_bound))
            .collect();
        let output_weights = (0..hidden)
            .map(|_| rng.random_range(-out_bound..=out_bound))
            .collect();
        MlpModel::new(input_weights, vec![0.0; hidden], output_weights, 0.0)
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn input_weights(&self) -> &[f64] {
        &self.input_weights
    }

    pub fn hidden_biases(&self) -> &[f64] {
        &self.hidden_biases
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.output_weights
    }

    pub fn output_bias(&self) -> f64 {
        self.output_bias
    }

    pub fn param_count(&self) -> usize {
        self.hidden * (INPUT_COUNT + 2) + 1
    }

    /// Input weights, hidden biases, output weights, output bias.
    pub fn to_flat(&self) -> Vec<f64> {
        MlpGradient {
            input_weights: self.input_weights.clone(),
            hidden_biases: self.hidden_biases.clone(),
            output_weights: self.output_weights.clone(),
            output_bias: self.output_bias,
        }
        .to_flat()
    }

    pub fn from_flat(hidden: usize, flat: &[f64]) -> Result<Self> {
        let w = hidden * INPUT_COUNT;
        if flat.len() != hidden * (INPUT_COUNT + 2) + 1 {
            return Err(Error::invalid(format!(
                "{} parameters do not fit {hidden} hidden units",
                flat.len()
            )));
        }
        MlpModel::new(
            flat[..w].to_vec(),
            flat[w..w + hidden].to_vec(),
            flat[w + hidden..w + 2 * hidden].to_vec(),
            flat[w + 2 * hidden],
        )
    }

    fn add_flat(&mut self, delta: &[f64]) {
        let w = self.input_weights.len();
        let h = self.hidden;
        for (p, d) in self.input_weights.iter_mut().zip(&delta[..w]) {
            *p += d;
        }
        for (p, d) in self.hidden_biases.iter_mut().zip(&delta[w..w + h]) {
            *p += d;
        }
        for (p, d) in self.output_weights.iter_mut().zip(&delta[w + h..w + 2 * h]) {
            *p += d;
        }
        self.output_bias += delta[w + 2 * h];
    }

    fn hidden_activation(&self, h: usize, x: &[f64; INPUT_COUNT]) -> f64 {
        let row = &self.input_weights[h * INPUT_COUNT..(h + 1) * INPUT_COUNT];
        let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.hidden_biases[h];
        z.tanh()
    }

    fn eval(&self, x: &[f64; INPUT_COUNT]) -> f64 {
        (0..self.hidden)
            .map(|h| self.output_weights[h] * self.hidden_activation(h, x))
            .sum::<f64>()
            + self.output_bias
    }

    pub fn forward(&self, x: &[f64; INPUT_COUNT]) -> Result<f64> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("MLP input is not finite"));
        }
        Ok(self.eval(x))
    }

    pub fn mse(&self, data: &NormalizedSet) -> f64 {
        let n = data.len() as f64;
        data.inputs
            .iter()
            .zip(&data.targets)
            .map(|(x, t)| (self.eval(x) - t).powi(2))
            .sum::<f64>()
            / n
    }

    /// Exact gradient of `1/N Σ (ŷ − t)²` with respect to every parameter.
    #[allow(clippy::needless_range_loop)]
    pub fn gradient(&self, batch: &NormalizedSet) -> Result<MlpGradient> {
        if batch.is_empty() {
            return Err(Error::Empty("gradient batch"));
        }
        if batch.inputs.len() != batch.targets.len() {
            return Err(Error::LengthMismatch {
                left: batch.targets.len(),
                right: batch.inputs.len(),
            });
        }
        let n = batch.len() as f64;
        let mut g = MlpGradient::zeros(self.hidden);
        let mut act = vec![0.0; self.hidden];
        for (x, t) in batch.inputs.iter().zip(&batch.targets) {
            for (h, a) in act.iter_mut().enumerate() {
                *a = self.hidden_activation(h, x);
            }
            let y: f64 = act.iter().zip(&self.output_weights).map(|(a, w)| a * w).sum::<f64>()
                + self.output_bias;
            let d = 2.0 * (y - t) / n;
            g.output_bias += d;
            for h in 0..self.hidden {
                g.output_weights[h] += d * act[h];
                let delta = d * self.output_weights[h] * (1.0 - act[h] * act[h]);
                g.hidden_biases[h] += delta;
                for (gw, v) in g.input_weights[h * INPUT_COUNT..(h + 1) * INPUT_COUNT]
                    .iter_mut()
                    .zip(x)
                {
                    *gw += delta * v;
                }
            }
        }
        Ok(g)
    }
}

impl Predictor for MlpModel {
    fn predict_normalized(&self, inputs: &[f64; INPUT_COUNT]) -> Result<f64> {
        self.forward(inputs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MlpTrainConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub init_scale: f64,
}

impl Default for MlpTrainConfig {
    fn default() -> Self {
        MlpTrainConfig {
            hidden: 12,
            learning_rate: 0.05,
            momentum: 0.9,
            max_epochs: 2000,
            patience: 100,
            seed: 0,
            init_scale: 1.0,
        }
    }
}

impl MlpTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::invalid("mlp.hidden must be at least 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid("mlp.learning_rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("mlp.momentum must lie in [0, 1)"));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::invalid("mlp.max_epochs and mlp.patience must be positive"));
        }
        if !(self.init_scale.is_finite() && self.init_scale > 0.0) {
            return Err(Error::invalid("mlp.init_scale must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_mse: f64,
    pub validation_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub stopped_epoch: usize,
    pub best_epoch: usize,
}

impl TrainHistory {
    pub fn best(&self) -> &EpochRecord {
        &self.epochs[self.best_epoch - 1]
    }
}

/// Full-batch gradient descent with momentum. Epochs count from 1; each
/// record holds the MSEs after that epoch's update. Training stops once the
/// validation MSE has not strictly improved for `patience` epochs.
pub fn train(
    config: &MlpTrainConfig,
    train: &NormalizedSet,
    validation: &NormalizedSet,
) -> Result<(MlpModel, TrainHistory)> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("training partition"));
    }
    if validation.is_empty() {
        return Err(Error::Empty("validation partition"));
    }
    let mut model = MlpModel::init(config.seed, config.hidden, config.init_scale)?;
    let mut velocity = vec![0.0; model.param_count()];
    let mut best = (f64::INFINITY, 0usize, model.clone());
    let mut epochs = Vec::new();
    let mut stale = 0;
    let mut stopped_epoch = config.max_epochs;

    for epoch in 1..=config.max_epochs {
        let grad = model.gradient(train)?.to_flat();
        for (v, g) in velocity.iter_mut().zip(&grad) {
            *v = config.momentum * *v - config.learning_rate * g;
        }
        model.add_flat(&velocity);

        let train_mse = model.mse(train);
        let validation_mse = model.mse(validation);
        if !train_mse.is_finite() || !validation_mse.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        epochs.push(EpochRecord { epoch, train_mse, validation_mse });

        if validation_mse < best.0 {
            best = (validation_mse, epoch, model.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                stopped_epoch = epoch;
                break;
            }
        }
    }

    let (_, best_epoch, best_model) = best;
    Ok((best_model, TrainHistory { epochs, stopped_epoch, best_epoch }))
}
