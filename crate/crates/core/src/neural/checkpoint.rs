use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::{Architecture, CellKind, RecurrentModel, TensorSpec};
use super::scaler::RangeScaler;
use super::train::{TrainConfig, TrainedNetwork};
use crate::error::{Error, Result};

/// JSON document holding everything needed to rebuild a trained network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub kind: CellKind,
    pub architecture: Architecture,
    pub shapes: BTreeMap<String, [usize; 2]>,
    /// Row-major weights keyed by tensor name.
    pub tensors: BTreeMap<String, Vec<f64>>,
    pub scaler: RangeScaler,
    pub config: TrainConfig,
    pub seed: u64,
}

impl Checkpoint {
    pub fn from_network(net: &TrainedNetwork) -> Self {
        let model = &net.model;
        let shapes = model.layout().iter().map(|t| (t.name.clone(), [t.rows, t.cols])).collect();
        let tensors = model.layout().iter().map(|t| (t.name.clone(), model.params()[t.range()].to_vec())).collect();
        Self {
            kind: model.kind(),
            architecture: model.architecture().clone(),
            shapes,
            tensors,
            scaler: net.scaler,
            config: net.config.clone(),
            seed: net.config.seed,
        }
    }

    pub fn into_network(self) -> Result<TrainedNetwork> {
        if self.architecture.kind != self.kind {
            return Err(Error::Shape("checkpoint kind disagrees with its architecture".into()));
        }
        let mut model = RecurrentModel::zeros(self.architecture)?;
        let layout: Vec<TensorSpec> = model.layout().to_vec();
        if layout.len() != self.tensors.len() {
            return Err(Error::Shape(format!("expected {} tensors, found {}", layout.len(), self.tensors.len())));
        }
        for spec in &layout {
            let values = self
                .tensors
                .get(&spec.name)
                .ok_or_else(|| Error::Shape(format!("checkpoint is missing tensor {}", spec.name)))?;
            if self.shapes.get(&spec.name) != Some(&[spec.rows, spec.cols]) || values.len() != spec.len() {
                return Err(Error::Shape(format!("tensor {} has the wrong shape", spec.name)));
            }
            model.params_mut()[spec.range()].copy_from_slice(values);
        }
        Ok(TrainedNetwork { model, scaler: self.scaler, config: self.config, history: Vec::new() })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
