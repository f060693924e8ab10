use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointLosses {
    pub mse: f64,
    pub rmse: f64,
    /// Mean absolute percentage error as a ratio (not times 100).
    pub mape: f64,
    pub mae: f64,
    /// Records left out of `mape` because their actual value is zero.
    pub mape_excluded: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QlikeForm {
    /// `ln ĥ + σ²/ĥ − 1`
    Raw,
    /// `σ²/ĥ − ln(σ²/ĥ) − 1`, zero only for a perfect forecast.
    Canonical,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Qlike {
    pub value: f64,
    pub excluded: usize,
}

fn check_pairs(predicted: &[f64], actual: &[f64]) -> Result<()> {
    if predicted.len() != actual.len() {
        return Err(Error::Shape(format!("{} predictions for {} actuals", predicted.len(), actual.len())));
    }
    if predicted.is_empty() {
        return Err(Error::invalid("no forecasts to evaluate"));
    }
    Ok(())
}

pub fn point_losses(predicted: &[f64], actual: &[f64]) -> Result<PointLosses> {
    check_pairs(predicted, actual)?;
    let n = predicted.len() as f64;
    let (mut se, mut ae, mut pe) = (0.0, 0.0, 0.0);
    let mut kept = 0usize;
    for (p, a) in predicted.iter().zip(actual) {
        let e = p - a;
        se += e * e;
        ae += e.abs();
        if *a != 0.0 {
            pe += e.abs() / a.abs();
            kept += 1;
        }
    }
    if kept == 0 {
        return Err(Error::invalid("every actual value is zero, MAPE is undefined"));
    }
    let mse = se / n;
    Ok(PointLosses { mse, rmse: mse.sqrt(), mape: pe / kept as f64, mae: ae / n, mape_excluded: predicted.len() - kept })
}

/// `q - ln q - 1` with `q = s2/h`, written in `d = q - 1` so that forecasts a
/// few ulps off still give a positive value instead of cancelling to zero.
fn canonical_term(s2: f64, h: f64) -> f64 {
    let d = (s2 - h) / h;
    if d == 0.0 {
        0.0
    } else if d.abs() < 1e-3 {
        // d - ln(1 + d) = d²/2 - d³/3 + d⁴/4 - ...
        let mut term = -d;
        let mut sum = 0.0;
        for k in 2..=8 {
            term *= -d;
            sum += term / k as f64;
        }
        sum
    } else {
        d - d.ln_1p()
    }
}

pub fn qlike(predicted: &[f64], actual: &[f64], form: QlikeForm) -> Result<Qlike> {
    check_pairs(predicted, actual)?;
    if let Some(i) = predicted.iter().position(|p| !(*p > 0.0)) {
        return Err(Error::Domain { index: i, message: format!("prediction {} is not positive", predicted[i]) });
    }
    let mut sum = 0.0;
    let mut kept = 0usize;
    for (h, s2) in predicted.iter().zip(actual) {
        match form {
            QlikeForm::Raw => {
                sum += h.ln() + s2 / h - 1.0;
                kept += 1;
            }
            QlikeForm::Canonical => {
                if *s2 > 0.0 {
                    sum += canonical_term(*s2, *h);
                    kept += 1;
                }
            }
        }
    }
    if kept == 0 {
        return Err(Error::invalid("every actual value is zero, canonical QLIKE is undefined"));
    }
    Ok(Qlike { value: sum / kept as f64, excluded: predicted.len() - kept })
}
