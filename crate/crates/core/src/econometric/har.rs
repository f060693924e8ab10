//! Heterogeneous autoregressive model of realized variance:
//! `RV_t = β0 + β1 RV^d_{t-1} + β2 RV^w_{t-1} + β3 RV^m_{t-1} + u_t`,
//! with the weekly and monthly components averaged over 5 and 22 lags.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::FitDiagnostics;
use crate::error::{Error, Result};
use crate::ingest::RvSeries;
use crate::linalg;

pub const WEEKLY_WINDOW: usize = 5;
pub const MONTHLY_WINDOW: usize = 22;
/// Minimum regression rows after dropping the first `monthly_window` lags.
pub const MIN_ROWS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarParams {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub weekly_window: usize,
    pub monthly_window: usize,
}

impl HarParams {
    pub fn new(beta0: f64, beta1: f64, beta2: f64, beta3: f64) -> Self {
        Self { beta0, beta1, beta2, beta3, weekly_window: WEEKLY_WINDOW, monthly_window: MONTHLY_WINDOW }
    }

    pub fn validate(&self) -> Result<()> {
        if self.weekly_window == 0 || self.weekly_window > self.monthly_window {
            return Err(Error::invalid(format!(
                "HAR windows need 1 <= weekly ({}) <= monthly ({})",
                self.weekly_window, self.monthly_window
            )));
        }
        Ok(())
    }

    fn predict(&self, f: HarFeatures) -> f64 {
        self.beta0 + self.beta1 * f.daily + self.beta2 * f.weekly + self.beta3 * f.monthly
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarFeatures {
    pub daily: f64,
    pub weekly: f64,
    pub monthly: f64,
}

/// Regressors for predicting `rv[t]` from `rv[..t]` (0-based `t`).
pub fn har_features(rv: &[f64], t: usize, weekly_window: usize, monthly_window: usize) -> Result<HarFeatures> {
    if t < monthly_window || t > rv.len() {
        return Err(Error::InsufficientData { needed: monthly_window, got: t.min(rv.len()) });
    }
    let avg = |w: usize| rv[t - w..t].iter().sum::<f64>() / w as f64;
    Ok(HarFeatures { daily: rv[t - 1], weekly: avg(weekly_window), monthly: avg(monthly_window) })
}

pub fn har_fit(rv: &RvSeries) -> Result<(HarParams, FitDiagnostics)> {
    har_fit_values(rv.values())
}

/// OLS of `RV_t` on an intercept and the three lagged components.
pub fn har_fit_values(rv: &[f64]) -> Result<(HarParams, FitDiagnostics)> {
    let (w, m) = (WEEKLY_WINDOW, MONTHLY_WINDOW);
    let rows = rv.len().saturating_sub(m);
    if rows < MIN_ROWS {
        return Err(Error::InsufficientData { needed: m + MIN_ROWS, got: rv.len() });
    }
    let mut design = Vec::with_capacity(rows * 4);
    let mut y = Vec::with_capacity(rows);
    for t in m..rv.len() {
        let f = har_features(rv, t, w, m)?;
        design.extend_from_slice(&[1.0, f.daily, f.weekly, f.monthly]);
        y.push(rv[t]);
    }
    let fit = linalg::ols(&design, rows, 4, &y)?;
    let b = &fit.coefficients;
    let n = rows as f64;
    let loglik = if fit.ssr > 0.0 {
        -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + (fit.ssr / n).ln() + 1.0)
    } else {
        f64::INFINITY
    };
    Ok((
        HarParams::new(b[0], b[1], b[2], b[3]),
        FitDiagnostics { log_likelihood: Some(loglik), sse: Some(fit.ssr), iterations: 1, evaluations: 1, converged: true },
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarForecast {
    pub values: Vec<f64>,
    /// True when at least one step was negative and floored at zero.
    pub floored: bool,
}

/// Iterated forecasts: each prediction is appended to the history before the
/// next step's regressors are formed.
pub fn har_forecast(params: &HarParams, history: &[f64], horizon: usize) -> Result<HarForecast> {
    params.validate()?;
    if history.len() < params.monthly_window {
        return Err(Error::InsufficientData { needed: params.monthly_window, got: history.len() });
    }
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let keep = params.monthly_window;
    let mut buf: Vec<f64> = history[history.len() - keep..].to_vec();
    let mut values = Vec::with_capacity(horizon);
    let mut floored = false;
    for _ in 0..horizon {
        let f = har_features(&buf, buf.len(), params.weekly_window, params.monthly_window)?;
        let mut v = params.predict(f);
        if v < 0.0 {
            v = 0.0;
            floored = true;
        }
        values.push(v);
        buf.push(v);
    }
    Ok(HarForecast { values, floored })
}

/// Runs the HAR recursion forward from `initial` (at least `monthly_window`
/// values) with additive Gaussian noise of standard deviation `noise_sd`.
/// Values are floored at zero. Returns `initial` followed by `n` new values.
pub fn har_simulate(params: &HarParams, initial: &[f64], n: usize, noise_sd: f64, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    if initial.len() < params.monthly_window {
        return Err(Error::InsufficientData { needed: params.monthly_window, got: initial.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = initial.to_vec();
    for _ in 0..n {
        let f = har_features(&out, out.len(), params.weekly_window, params.monthly_window)?;
        let mut v = params.predict(f);
        if noise_sd > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            v += noise_sd * z;
        }
        out.push(v.max(0.0));
    }
    Ok(out)
}
