use crate::error::{Error, Result};

pub const DEFAULT_SEQUENCE_LENGTH: usize = 12;

/// Supervised pairs cut from a single series with one feature per step:
/// inputs `[samples, sequence_length, 1]`, targets `[samples, output_days]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowedDataset {
    inputs: Vec<f64>,
    targets: Vec<f64>,
    sequence_length: usize,
    output_days: usize,
}

impl WindowedDataset {
    pub fn samples(&self) -> usize {
        if self.sequence_length == 0 { 0 } else { self.inputs.len() / self.sequence_length }
    }

    pub fn sequence_length(&self) -> usize {
        self.sequence_length
    }

    pub fn output_days(&self) -> usize {
        self.output_days
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.sequence_length..(i + 1) * self.sequence_length]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.output_days..(i + 1) * self.output_days]
    }

    pub fn is_empty(&self) -> bool {
        self.samples() == 0
    }
}

/// Sample `i` reads `values[i..i+seq]` and predicts `values[i+seq..i+seq+out]`.
pub fn make_windows(values: &[f64], sequence_length: usize, output_days: usize) -> Result<WindowedDataset> {
    if sequence_length == 0 || output_days == 0 {
        return Err(Error::invalid("sequence length and output days must be positive"));
    }
    let span = sequence_length + output_days;
    if values.len() < span {
        return Err(Error::InsufficientData { needed: span, got: values.len() });
    }
    let samples = values.len() - span + 1;
    let mut inputs = Vec::with_capacity(samples * sequence_length);
    let mut targets = Vec::with_capacity(samples * output_days);
    for i in 0..samples {
        inputs.extend_from_slice(&values[i..i + sequence_length]);
        targets.extend_from_slice(&values[i + sequence_length..i + span]);
    }
    Ok(WindowedDataset { inputs, targets, sequence_length, output_days })
}
