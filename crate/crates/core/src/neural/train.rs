use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, clip_global_norm, AdamConfig, AdamState};
use super::model::{backprop_weighted, Architecture, CellKind, GradWorkspace, RecurrentModel};
use super::scaler::RangeScaler;
use super::window::{make_windows, WindowedDataset};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub early_stop_patience: usize,
    pub min_delta: f64,
    /// Global gradient-norm ceiling; `None` disables clipping.
    pub clip_norm: Option<f64>,
    pub seed: u64,
}

impl TrainConfig {
    /// GRU and LSTM: 50 epochs; RNN: 30. Batch 64 for GRU, 16 otherwise.
    pub fn default_for(kind: CellKind) -> Self {
        let (epochs, batch_size) = match kind {
            CellKind::Gru => (50, 64),
            CellKind::Lstm => (50, 16),
            CellKind::Rnn => (30, 16),
        };
        Self {
            learning_rate: 1e-4,
            epochs,
            batch_size,
            early_stop_patience: 5,
            min_delta: 1e-7,
            clip_norm: Some(1.0),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || self.batch_size == 0 || self.early_stop_patience == 0 {
            return Err(Error::invalid("learning rate, batch size and patience must be positive"));
        }
        if !(self.min_delta >= 0.0) || self.clip_norm.is_some_and(|c| !(c > 0.0)) {
            return Err(Error::invalid("min_delta must be non-negative and clip_norm positive"));
        }
        Ok(())
    }
}

/// Trains the default architecture for `kind` on `dataset`.
pub fn train(kind: CellKind, dataset: &WindowedDataset, config: &TrainConfig) -> Result<(RecurrentModel, Vec<f64>)> {
    let mut arch = Architecture::default_for(kind, dataset.output_days());
    arch.sequence_length = dataset.sequence_length();
    train_architecture(arch, dataset, config)
}

/// Mini-batch Adam with dropout on the final hidden state and early stopping
/// on the per-epoch training loss. Returns the model and the loss history.
///
/// The weights are drawn from the seed's default stream; shuffling and
/// dropout masks come from stream 1 of the same seed.
pub fn train_architecture(
    arch: Architecture,
    dataset: &WindowedDataset,
    config: &TrainConfig,
) -> Result<(RecurrentModel, Vec<f64>)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::invalid("training dataset is empty"));
    }
    if arch.sequence_length != dataset.sequence_length() {
        return Err(Error::Shape(format!(
            "model expects sequences of {}, dataset has {}",
            arch.sequence_length,
            dataset.sequence_length()
        )));
    }
    let mut model = RecurrentModel::init(arch, config.seed)?;
    let arch = model.architecture().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);

    let adam = AdamConfig { learning_rate: config.learning_rate, ..AdamConfig::default() };
    let mut state = AdamState::new(adam, model.params().len());
    let mut ws = GradWorkspace::default();
    let mut order: Vec<usize> = (0..dataset.samples()).collect();
    let mut masks = Vec::new();
    let keep = 1.0 - arch.dropout_rate;
    let mut history = Vec::with_capacity(config.epochs);
    let mut best = f64::INFINITY;
    let mut stale = 0;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mask = if arch.dropout_rate > 0.0 {
                masks.clear();
                masks.extend(
                    (0..batch.len() * arch.hidden_units)
                        .map(|_| if rng.random::<f64>() < arch.dropout_rate { 0.0 } else { 1.0 / keep }),
                );
                Some(masks.as_slice())
            } else {
                None
            };
            let mut g = backprop_weighted(&model, dataset, batch, mask, 1.0, &mut ws)?;
            total += g.loss * batch.len() as f64;
            if let Some(c) = config.clip_norm {
                clip_global_norm(&mut g.values, c);
            }
            adam_step(&mut state, model.params_mut(), &g.values)?;
        }
        let loss = total / dataset.samples() as f64;
        if !loss.is_finite() {
            return Err(Error::invalid("training diverged to a non-finite loss"));
        }
        history.push(loss);
        if loss < best - config.min_delta {
            best = loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.early_stop_patience {
                break;
            }
        }
    }
    Ok((model, history))
}

/// Forecast in original units from exactly `sequence_length` recent values.
pub fn predict(model: &RecurrentModel, scaler: &RangeScaler, recent: &[f64]) -> Result<Vec<f64>> {
    let need = model.architecture().sequence_length;
    if recent.len() != need {
        return Err(Error::Shape(format!("prediction needs exactly {need} recent values, got {}", recent.len())));
    }
    let x = scaler.transform_all(recent);
    Ok(model.predict_raw(&x)?.into_iter().map(|y| scaler.inverse(y)).collect())
}

/// A trained network with the scaler and settings it was fitted with.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedNetwork {
    pub model: RecurrentModel,
    pub scaler: RangeScaler,
    pub config: TrainConfig,
    pub history: Vec<f64>,
}

impl TrainedNetwork {
    /// Scales `train` with its own range, windows it and trains `arch`.
    pub fn fit(arch: Architecture, train: &[f64], config: &TrainConfig) -> Result<Self> {
        let scaler = RangeScaler::fit(train)?;
        let data = make_windows(&scaler.transform_all(train), arch.sequence_length, arch.output_days)?;
        let (model, history) = train_architecture(arch, &data, config)?;
        Ok(Self { model, scaler, config: config.clone(), history })
    }

    pub fn predict(&self, recent: &[f64]) -> Result<Vec<f64>> {
        predict(&self.model, &self.scaler, recent)
    }
}
