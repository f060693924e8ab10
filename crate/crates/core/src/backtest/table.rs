use serde::{Deserialize, Serialize};

use super::loss::QlikeForm;
use super::ForecastSet;
use crate::error::{Error, Result};

pub const LOSS_NAMES: [&str; 6] = ["mse", "rmse", "mape", "mae", "qlike_raw", "qlike_canonical"];

/// Column label: days up to 6, then weeks and 30-day months where exact.
pub fn horizon_label(h: usize) -> String {
    match h {
        7 | 14 | 21 => format!("{}w", h / 7),
        30 | 60 | 90 | 120 | 180 | 360 => format!("{}m", h / 30),
        _ => format!("{h}d"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossCell {
    pub model: String,
    pub horizon: usize,
    pub records: usize,
    pub mse: f64,
    pub rmse: f64,
    pub mape: f64,
    pub mae: f64,
    pub qlike_raw: f64,
    pub qlike_canonical: f64,
    pub mape_excluded: usize,
    pub qlike_excluded: usize,
    pub floored: usize,
    pub refit_every: usize,
    pub refits: usize,
    pub seed: Option<u64>,
}

impl LossCell {
    pub fn from_set(set: &ForecastSet) -> Result<Self> {
        let p = set.point_losses()?;
        let raw = set.qlike(QlikeForm::Raw)?;
        let canonical = set.qlike(QlikeForm::Canonical)?;
        Ok(Self {
            model: set.model.clone(),
            horizon: set.horizon,
            records: set.records.len(),
            mse: p.mse,
            rmse: p.rmse,
            mape: p.mape,
            mae: p.mae,
            qlike_raw: raw.value,
            qlike_canonical: canonical.value,
            mape_excluded: p.mape_excluded,
            qlike_excluded: canonical.excluded,
            floored: set.floored,
            refit_every: set.refit_every,
            refits: set.refits,
            seed: set.seed,
        })
    }

    pub fn loss(&self, name: &str) -> Option<f64> {
        Some(match name {
            "mse" => self.mse,
            "rmse" => self.rmse,
            "mape" => self.mape,
            "mae" => self.mae,
            "qlike_raw" => self.qlike_raw,
            "qlike_canonical" => self.qlike_canonical,
            _ => return None,
        })
    }
}

/// Loss grid: loss family major, one row per model, one column per horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossTable {
    pub models: Vec<String>,
    pub horizons: Vec<usize>,
    pub cells: Vec<LossCell>,
}

impl LossTable {
    pub fn from_sets(sets: &[ForecastSet], horizons: &[usize]) -> Result<Self> {
        let mut models: Vec<String> = Vec::new();
        for s in sets {
            if !models.contains(&s.model) {
                models.push(s.model.clone());
            }
        }
        let cells = sets.iter().map(LossCell::from_set).collect::<Result<Vec<_>>>()?;
        Ok(Self { models, horizons: horizons.to_vec(), cells })
    }

    pub fn cell(&self, model: &str, horizon: usize) -> Option<&LossCell> {
        self.cells.iter().find(|c| c.model == model && c.horizon == horizon)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("loss,model");
        for h in &self.horizons {
            out.push(',');
            out.push_str(&horizon_label(*h));
        }
        out.push('\n');
        for loss in LOSS_NAMES {
            for m in &self.models {
                out.push_str(loss);
                out.push(',');
                out.push_str(m);
                for h in &self.horizons {
                    out.push(',');
                    if let Some(v) = self.cell(m, *h).and_then(|c| c.loss(loss)) {
                        out.push_str(&v.to_string());
                    }
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Parses the CSV layout back into `(loss, model, horizon label, value)`.
    pub fn parse_csv(text: &str) -> Result<Vec<(String, String, String, f64)>> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| Error::invalid("empty loss table"))?.split(',').collect();
        if header.len() < 3 || header[0] != "loss" || header[1] != "model" {
            return Err(Error::invalid("loss table header must start with `loss,model`"));
        }
        let mut out = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(Error::Parse { line: i as u64 + 2, message: "wrong number of fields".into() });
            }
            for (label, v) in header[2..].iter().zip(&fields[2..]) {
                if v.is_empty() {
                    continue;
                }
                let value = v.parse().map_err(|_| Error::Parse { line: i as u64 + 2, message: format!("bad number `{v}`") })?;
                out.push((fields[0].to_string(), fields[1].to_string(), label.to_string(), value));
            }
        }
        Ok(out)
    }
}
