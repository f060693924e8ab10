use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use crate::backtest::{ModelSpec, RollingSpec, MODEL_NAMES};
use crate::error::{Error, Result};
use crate::ingest::Frequency;

pub const DAILY_WINDOW: usize = 4077;
pub const HOURLY_WINDOW: usize = 1149;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    /// `timestamp,price`
    #[default]
    Prices,
    /// `timestamp,rv`
    Rv,
}

/// Per-model overrides. Omitted fields keep the defaults for the model.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    pub hidden_units: Option<usize>,
    /// 0 removes the dense layer.
    pub dense_units: Option<usize>,
    pub sequence_length: Option<usize>,
    pub dropout_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub patience: Option<usize>,
    pub refit_every: Option<usize>,
}

impl ModelConfig {
    /// Accepts either a bare model name or an object with overrides.
    pub fn from_value(v: Value) -> Result<Self> {
        match v {
            Value::String(name) => Ok(Self { name, ..Default::default() }),
            Value::Object(_) => serde_json::from_value(v).map_err(|e| Error::Config(format!("models: {e}"))),
            other => Err(Error::Config(format!("models: expected a name or an object, got {other}"))),
        }
    }

    pub fn to_spec(&self) -> Result<ModelSpec> {
        let mut spec = ModelSpec::from_name(&self.name)?;
        let neural_only = [
            self.hidden_units.is_some(),
            self.dense_units.is_some(),
            self.sequence_length.is_some(),
            self.dropout_rate.is_some(),
            self.epochs.is_some(),
            self.batch_size.is_some(),
            self.learning_rate.is_some(),
            self.patience.is_some(),
        ];
        match &mut spec {
            ModelSpec::Neural(n) => {
                let a = &mut n.architecture;
                let t = &mut n.train;
                if let Some(v) = self.hidden_units {
                    a.hidden_units = v;
                }
                if let Some(v) = self.dense_units {
                    a.dense_units = (v > 0).then_some(v);
                }
                if let Some(v) = self.sequence_length {
                    a.sequence_length = v;
                }
                if let Some(v) = self.dropout_rate {
                    a.dropout_rate = v;
                }
                if let Some(v) = self.epochs {
                    t.epochs = v;
                }
                if let Some(v) = self.batch_size {
                    t.batch_size = v;
                }
                if let Some(v) = self.learning_rate {
                    t.learning_rate = v;
                }
                if let Some(v) = self.patience {
                    t.early_stop_patience = v;
                }
                a.validate()?;
                t.validate()?;
            }
            _ if neural_only.iter().any(|b| *b) => {
                return Err(Error::Config(format!("model `{}` takes no network settings", self.name)));
            }
            _ => {}
        }
        Ok(spec)
    }
}

fn default_frequency() -> Frequency {
    Frequency::Daily
}

fn default_horizons() -> Vec<usize> {
    vec![1]
}

fn default_models() -> Vec<Value> {
    MODEL_NAMES.iter().map(|m| Value::String(m.to_string())).collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Data file, relative to the config file's directory.
    pub data: PathBuf,
    #[serde(default = "default_frequency")]
    pub frequency: Frequency,
    #[serde(default)]
    pub input: InputKind,
    /// Bucket for RV built from intraday prices; hourly by default.
    pub rv_bucket: Option<Frequency>,
    pub window_size: Option<usize>,
    pub train_fraction: Option<f64>,
    #[serde(default = "default_models")]
    models: Vec<Value>,
    #[serde(default = "default_horizons")]
    pub horizons: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    pub econometric_refit_every: Option<usize>,
    pub neural_refit_every: Option<usize>,
    pub output: Option<PathBuf>,
    pub lb_lags: Option<usize>,
    pub arch_lags: Option<usize>,
    pub adf_lag: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.data.is_relative() {
            cfg.data = base.join(&cfg.data);
        }
        if !cfg.data.exists() {
            return Err(Error::Config(format!("data file {} does not exist", cfg.data.display())));
        }
        if cfg.window_size.is_some() && cfg.train_fraction.is_some() {
            return Err(Error::Config("set at most one of window_size and train_fraction".into()));
        }
        if cfg.horizons.is_empty() || cfg.horizons.contains(&0) {
            return Err(Error::Config("horizons must be a non-empty list of positive integers".into()));
        }
        cfg.model_configs()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn model_configs(&self) -> Result<Vec<ModelConfig>> {
        if self.models.is_empty() {
            return Err(Error::Config("models must not be empty".into()));
        }
        let configs = self.models.iter().cloned().map(ModelConfig::from_value).collect::<Result<Vec<_>>>()?;
        for c in &configs {
            c.to_spec()?;
        }
        Ok(configs)
    }

    /// Frequency of the RV series the models see.
    pub fn rv_frequency(&self) -> Frequency {
        match (self.input, self.frequency) {
            (InputKind::Prices, Frequency::Minute) => self.rv_bucket.unwrap_or(Frequency::Hourly),
            (InputKind::Prices, f) => self.rv_bucket.unwrap_or(f),
            (InputKind::Rv, f) => f,
        }
    }

    /// Rolling window length for a series of `n` observations.
    pub fn window(&self, n: usize) -> usize {
        match (self.window_size, self.train_fraction) {
            (Some(w), _) => w,
            (None, Some(f)) => (f * n as f64).floor() as usize,
            (None, None) if self.rv_frequency() == Frequency::Daily => DAILY_WINDOW,
            (None, None) => HOURLY_WINDOW,
        }
    }

    pub fn rolling_spec(&self, n: usize, model: &ModelConfig) -> RollingSpec {
        let mut spec = RollingSpec::new(self.window(n), self.horizons.clone());
        if let Some(v) = self.econometric_refit_every {
            spec.econometric_refit_every = v;
        }
        if let Some(v) = self.neural_refit_every {
            spec.neural_refit_every = v;
        }
        if let Some(v) = model.refit_every {
            spec.econometric_refit_every = v;
            spec.neural_refit_every = v;
        }
        spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(json: &str) -> Result<RunConfig> {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("d.csv"), "timestamp,price\n").unwrap();
        RunConfig::from_json(json, dir.path())
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse(r#"{"data": "d.csv", "windoww": 10}"#).unwrap_err().to_string();
        assert!(e.contains("windoww"), "{e}");
    }

    #[test]
    fn defaults() {
        let c = parse(r#"{"data": "d.csv"}"#).unwrap();
        assert_eq!(c.window(10_000), 4077);
        assert_eq!(c.horizons, vec![1]);
        let names: Vec<String> = c.model_configs().unwrap().into_iter().map(|m| m.name).collect();
        assert_eq!(names, MODEL_NAMES);
        let minute = parse(r#"{"data": "d.csv", "frequency": "minute"}"#).unwrap();
        assert_eq!(minute.rv_frequency(), Frequency::Hourly);
        assert_eq!(minute.window(5000), 1149);
    }

    #[test]
    fn default_network_settings() {
        let c = parse(r#"{"data": "d.csv", "models": ["gru", "lstm", "rnn"]}"#).unwrap();
        let specs: Vec<ModelSpec> = c.model_configs().unwrap().iter().map(|m| m.to_spec().unwrap()).collect();
        let expect = [(16, Some(4), 50, 64), (8, None, 50, 16), (8, None, 30, 16)];
        for (s, (units, dense, epochs, batch)) in specs.iter().zip(expect) {
            let ModelSpec::Neural(n) = s else { panic!() };
            assert_eq!(n.architecture.hidden_units, units);
            assert_eq!(n.architecture.dense_units, dense);
            assert_eq!(n.architecture.sequence_length, 12);
            assert_eq!(n.architecture.dropout_rate, 0.2);
            assert_eq!((n.train.epochs, n.train.batch_size, n.train.learning_rate), (epochs, batch, 1e-4));
        }
    }

    #[test]
    fn model_entries() {
        let c = parse(r#"{"data": "d.csv", "models": [{"name": "gru", "epochs": 3, "dense_units": 0}]}"#).unwrap();
        let ModelSpec::Neural(n) = c.model_configs().unwrap()[0].to_spec().unwrap() else { panic!() };
        assert_eq!(n.train.epochs, 3);
        assert_eq!(n.architecture.dense_units, None);
        let e = parse(r#"{"data": "d.csv", "models": ["arima"]}"#).unwrap_err().to_string();
        assert!(MODEL_NAMES.iter().all(|m| e.contains(m)), "{e}");
        assert!(parse(r#"{"data": "d.csv", "models": [{"name": "har", "epochs": 3}]}"#).is_err());
        assert!(parse(r#"{"data": "d.csv", "models": [{"name": "gru", "epoch": 3}]}"#).is_err());
    }

    #[test]
    fn missing_data_file() {
        assert!(parse(r#"{"data": "nope.csv"}"#).is_err());
        assert!(parse(r#"{"data": "d.csv", "window_size": 100, "train_fraction": 0.5}"#).is_err());
    }
}
