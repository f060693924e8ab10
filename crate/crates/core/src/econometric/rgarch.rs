//! Realized GARCH with the return-and-measurement form
//!
//! ```text
//! r_t = sqrt(h_t) z_t
//! h_t = ω + α r²_{t-1} + β h_{t-1} + γ x_{t-1}
//! x_t = ξ + φ h_t + e_t,   e_t ~ N(0, σ_u²)
//! ```
//!
//! where `x_t` is the observed realized variance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::optimize::{minimize, Bound, OptimizeOptions};
use super::{FitDiagnostics, FitOptions, VARIANCE_FLOOR};
use crate::error::{Error, Result};
use crate::ingest::{ReturnSeries, RvSeries};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizedGarchParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub xi: f64,
    pub phi: f64,
    pub sigma_u: f64,
}

impl RealizedGarchParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha >= 0.0
            && self.beta >= 0.0
            && self.sigma_u > 0.0
            && self.beta + self.gamma * self.phi < 1.0
            && [self.omega, self.gamma, self.xi, self.phi].iter().all(|v| v.is_finite());
        if !ok {
            return Err(Error::invalid(format!(
                "realized GARCH parameters need alpha, beta >= 0, sigma_u > 0 and beta + gamma*phi < 1 (got {self:?})"
            )));
        }
        Ok(())
    }

    /// Persistence of `E[h]` once `r²` and `x` are replaced by their
    /// conditional expectations: `α + β + γφ`.
    pub fn persistence(&self) -> f64 {
        self.alpha + self.beta + self.gamma * self.phi
    }

    /// Unconditional mean of `h` when `persistence() < 1`.
    pub fn mean_variance(&self) -> f64 {
        (self.omega + self.gamma * self.xi) / (1.0 - self.persistence())
    }
}

/// Filter state at the last in-sample observation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RgarchState {
    pub last_r2: f64,
    pub last_x: f64,
    pub last_h: f64,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn loglik_with_start(p: &RealizedGarchParams, r: &[f64], x: &[f64], h1: f64) -> f64 {
    let ln_su2 = (p.sigma_u * p.sigma_u).ln();
    let inv_su2 = 1.0 / (p.sigma_u * p.sigma_u);
    let mut h = h1.max(VARIANCE_FLOOR);
    let mut ll = 0.0;
    for t in 0..r.len() {
        if t > 0 {
            h = (p.omega + p.alpha * r[t - 1] * r[t - 1] + p.beta * h + p.gamma * x[t - 1]).max(VARIANCE_FLOOR);
        }
        let e = x[t] - p.xi - p.phi * h;
        ll += h.ln() + r[t] * r[t] / h + ln_su2 + e * e * inv_su2;
    }
    -0.5 * (2.0 * r.len() as f64 * LN_2PI + ll)
}

/// Joint log-likelihood of returns and realized measures, `h_1 = mean(x)`.
pub fn rgarch_log_likelihood(params: &RealizedGarchParams, r: &[f64], x: &[f64]) -> f64 {
    if r.is_empty() || r.len() != x.len() {
        return f64::NAN;
    }
    loglik_with_start(params, r, x, mean(x))
}

/// Conditional variances `h_1..h_n`.
pub fn rgarch_filter(params: &RealizedGarchParams, r: &[f64], x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(r.len());
    if r.is_empty() {
        return out;
    }
    let mut h = mean(x).max(VARIANCE_FLOOR);
    out.push(h);
    for t in 1..r.len() {
        h = (params.omega + params.alpha * r[t - 1] * r[t - 1] + params.beta * h + params.gamma * x[t - 1]).max(VARIANCE_FLOOR);
        out.push(h);
    }
    out
}

/// State after filtering the whole sample, ready for [`rgarch_forecast`].
pub fn rgarch_state(params: &RealizedGarchParams, r: &[f64], x: &[f64]) -> Option<RgarchState> {
    let h = rgarch_filter(params, r, x);
    let last = r.len().checked_sub(1)?;
    Some(RgarchState { last_r2: r[last] * r[last], last_x: x[last], last_h: h[last] })
}

pub fn rgarch_fit(
    returns: &ReturnSeries,
    rv: &RvSeries,
    options: &FitOptions<RealizedGarchParams>,
) -> Result<(RealizedGarchParams, FitDiagnostics)> {
    if returns.timestamps() != rv.timestamps() {
        return Err(Error::Shape("returns and realized variance are not aligned".into()));
    }
    rgarch_fit_values(returns.returns(), rv.values(), options)
}

/// Maximum-likelihood fit on aligned raw slices.
///
/// Data are rescaled by `s = mean(x)` (returns by `sqrt(s)`), which leaves
/// `α, β, γ, φ` unchanged and divides `ω, ξ, σ_u` by `s`. The search keeps
/// `α + β + γφ < 1` and `γ > 0`.
pub fn rgarch_fit_values(
    r: &[f64],
    x: &[f64],
    options: &FitOptions<RealizedGarchParams>,
) -> Result<(RealizedGarchParams, FitDiagnostics)> {
    if r.len() != x.len() {
        return Err(Error::Shape(format!("{} returns but {} realized values", r.len(), x.len())));
    }
    if r.len() < 200 {
        return Err(Error::InsufficientData { needed: 200, got: r.len() });
    }
    if r.iter().chain(x).any(|v| !v.is_finite()) {
        return Err(Error::invalid("inputs contain non-finite values"));
    }
    let s = mean(x);
    if !(s > 0.0) {
        return Err(Error::invalid("realized variance is identically zero"));
    }
    let rs = s.sqrt();
    let rt: Vec<f64> = r.iter().map(|v| v / rs).collect();
    let xt: Vec<f64> = x.iter().map(|v| v / s).collect();
    let h1 = mean(&xt);

    let init = match options.initial {
        Some(p) => RealizedGarchParams {
            omega: p.omega / s,
            xi: p.xi / s,
            sigma_u: p.sigma_u / s,
            ..p
        },
        None => {
            let (alpha, beta, gamma, phi) = (0.05, 0.6, 0.25, 1.0);
            let sd = (xt.iter().map(|v| (v - h1) * (v - h1)).sum::<f64>() / xt.len() as f64).sqrt().max(1e-3);
            RealizedGarchParams { omega: 1.0 - alpha - beta - gamma * phi, alpha, beta, gamma, xi: 0.0, phi, sigma_u: sd }
        }
    };
    let x0 = [
        init.omega.max(1e-8),
        init.alpha.max(1e-8),
        init.beta.clamp(1e-8, 1.0 - 1e-8),
        init.gamma.max(1e-8),
        init.xi,
        init.phi,
        init.sigma_u.max(1e-8),
    ];
    let bounds = [Bound::Positive, Bound::Positive, Bound::Unit, Bound::Positive, Bound::Free, Bound::Free, Bound::Positive];

    let to_params = |v: &[f64]| RealizedGarchParams {
        omega: v[0],
        alpha: v[1],
        beta: v[2],
        gamma: v[3],
        xi: v[4],
        phi: v[5],
        sigma_u: v[6],
    };
    let objective = |v: &[f64]| {
        let p = to_params(v);
        if p.persistence() >= 1.0 {
            return f64::INFINITY;
        }
        -loglik_with_start(&p, &rt, &xt, h1)
    };
    let opts = OptimizeOptions { max_evaluations: options.max_evaluations, initial_step: options.initial_step, ..Default::default() };
    let res = minimize(objective, &x0, &bounds, opts)?;
    let scaled = to_params(&res.point);
    let params = RealizedGarchParams { omega: scaled.omega * s, xi: scaled.xi * s, sigma_u: scaled.sigma_u * s, ..scaled };
    let diagnostics = FitDiagnostics {
        log_likelihood: Some(rgarch_log_likelihood(&params, r, x)),
        sse: None,
        iterations: res.iterations,
        evaluations: res.evaluations,
        converged: res.converged,
    };
    Ok((params, diagnostics))
}

/// Variance path `h_{n+1..n+h}`. Step 1 uses the observed `(r², x)`; later
/// steps substitute `E[r²] = h` and `E[x] = ξ + φh`.
pub fn rgarch_forecast(params: &RealizedGarchParams, state: &RgarchState, horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    let p = params;
    let mut h = p.omega + p.alpha * state.last_r2 + p.beta * state.last_h + p.gamma * state.last_x;
    let mut out = Vec::with_capacity(horizon);
    out.push(h);
    for _ in 1..horizon {
        h = p.omega + p.alpha * h + p.beta * h + p.gamma * (p.xi + p.phi * h);
        out.push(h);
    }
    Ok(out)
}

/// Simulated `(r, x)` with `h_1` at the unconditional mean. Requires
/// `persistence() < 1`.
pub fn rgarch_simulate(params: &RealizedGarchParams, n: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate()?;
    if params.persistence() >= 1.0 {
        return Err(Error::invalid("simulation needs alpha + beta + gamma*phi < 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    let mut h = params.mean_variance();
    for t in 0..n {
        if t > 0 {
            let (rp, xp): (f64, f64) = (r[t - 1], x[t - 1]);
            h = (params.omega + params.alpha * rp * rp + params.beta * h + params.gamma * xp).max(VARIANCE_FLOOR);
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        let e: f64 = StandardNormal.sample(&mut rng);
        r.push(h.sqrt() * z);
        x.push(params.xi + params.phi * h + params.sigma_u * e);
    }
    Ok((r, x))
}
