use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-4, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Moment estimates for one parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(config: AdamConfig, params: usize) -> Self {
        Self { config, step: 0, m: vec![0.0; params], v: vec![0.0; params] }
    }
}

/// One bias-corrected Adam update, with epsilon added to the uncorrected
/// root second moment: `θ -= lr √(1-β₂ᵗ)/(1-β₁ᵗ) · m / (√v + ε)`.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], gradients: &[f64]) -> Result<()> {
    if params.len() != state.m.len() || gradients.len() != params.len() {
        return Err(Error::Shape(format!(
            "optimizer tracks {} parameters, got {} parameters and {} gradients",
            state.m.len(),
            params.len(),
            gradients.len()
        )));
    }
    state.step += 1;
    let AdamConfig { learning_rate, beta1, beta2, epsilon } = state.config;
    let t = state.step as i32;
    let lr_t = learning_rate * (1.0 - beta2.powi(t)).sqrt() / (1.0 - beta1.powi(t));
    for (((p, g), m), v) in params.iter_mut().zip(gradients).zip(&mut state.m).zip(&mut state.v) {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        *p -= lr_t * *m / (v.sqrt() + epsilon);
    }
    Ok(())
}

/// Rescales `gradients` in place so their Euclidean norm is at most `max_norm`.
pub fn clip_global_norm(gradients: &mut [f64], max_norm: f64) -> f64 {
    let norm = gradients.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        gradients.iter_mut().for_each(|g| *g *= s);
    }
    norm
}
