//! GARCH(1,1) with Gaussian quasi-likelihood:
//! `σ²_t = ω + α u²_{t-1} + β σ²_{t-1}`, `ω = γ V_L`, `γ = 1 - α - β`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::optimize::{minimize, Bound, OptimizeOptions};
use super::{FitDiagnostics, FitOptions, VARIANCE_FLOOR};
use crate::error::{Error, Result};
use crate::ingest::{Frequency, ReturnSeries};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl GarchParams {
    pub fn new(omega: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = Self { omega, alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha + self.beta < 1.0) {
            return Err(Error::invalid(format!(
                "GARCH parameters need omega > 0, alpha, beta >= 0, alpha + beta < 1 (got {self:?})"
            )));
        }
        Ok(())
    }

    pub fn persistence(&self) -> f64 {
        self.alpha + self.beta
    }

    /// Weight on the long-run variance, `1 - α - β`.
    pub fn gamma(&self) -> f64 {
        1.0 - self.alpha - self.beta
    }

    pub fn v_long_run(&self) -> f64 {
        self.omega / self.gamma()
    }
}

fn sample_variance(u: &[f64]) -> f64 {
    let n = u.len() as f64;
    let mean = u.iter().sum::<f64>() / n;
    u.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

fn loglik_with_start(params: &GarchParams, u: &[f64], sigma1: f64) -> f64 {
    let mut s2 = sigma1;
    let mut ll = 0.0;
    for (t, ut) in u.iter().enumerate() {
        if t > 0 {
            let prev = u[t - 1];
            s2 = params.omega + params.alpha * prev * prev + params.beta * s2;
        }
        let s2f = s2.max(VARIANCE_FLOOR);
        s2 = s2f;
        ll += s2f.ln() + ut * ut / s2f;
    }
    -0.5 * (u.len() as f64 * LN_2PI + ll)
}

/// Gaussian log-likelihood with `σ²_1` set to the sample variance.
pub fn garch_log_likelihood(params: &GarchParams, returns: &[f64]) -> f64 {
    if returns.len() < 2 {
        return f64::NAN;
    }
    loglik_with_start(params, returns, sample_variance(returns))
}

/// Conditional variances `σ²_1..σ²_n` along the sample.
pub fn garch_filter(params: &GarchParams, returns: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(returns.len());
    if returns.len() < 2 {
        return out;
    }
    let mut s2 = sample_variance(returns).max(VARIANCE_FLOOR);
    out.push(s2);
    for prev in &returns[..returns.len() - 1] {
        s2 = (params.omega + params.alpha * prev * prev + params.beta * s2).max(VARIANCE_FLOOR);
        out.push(s2);
    }
    out
}

pub fn garch_fit(returns: &ReturnSeries, options: &FitOptions<GarchParams>) -> Result<(GarchParams, FitDiagnostics)> {
    garch_fit_values(returns.returns(), options)
}

/// Maximum-likelihood fit on raw returns.
///
/// The search runs on returns rescaled to unit sample variance over
/// `(ln ω, logit(α + β), logit(α / (α + β)))`, so `α + β < 1` holds by
/// construction.
pub fn garch_fit_values(u: &[f64], options: &FitOptions<GarchParams>) -> Result<(GarchParams, FitDiagnostics)> {
    if u.len() < 100 {
        return Err(Error::InsufficientData { needed: 100, got: u.len() });
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("returns contain non-finite values"));
    }
    let var = sample_variance(u);
    let max_abs = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(var > (1e-12 * max_abs).powi(2)) {
        return Err(Error::invalid("returns have zero sample variance"));
    }
    let scale = var.sqrt();
    let z: Vec<f64> = u.iter().map(|v| v / scale).collect();
    let start = sample_variance(&z);

    let init = options.initial.unwrap_or(GarchParams { omega: 0.05 * var, alpha: 0.05, beta: 0.90 });
    let persistence = init.persistence().clamp(1e-6, 1.0 - 1e-6);
    let share = (init.alpha / init.persistence()).clamp(1e-6, 1.0 - 1e-6);
    let x0 = [init.omega / var, persistence, share];
    let bounds = [Bound::Positive, Bound::Unit, Bound::Unit];

    let to_params = |x: &[f64]| GarchParams { omega: x[0], alpha: x[1] * x[2], beta: x[1] * (1.0 - x[2]) };
    let objective = |x: &[f64]| -loglik_with_start(&to_params(x), &z, start);
    let opts = OptimizeOptions { max_evaluations: options.max_evaluations, initial_step: options.initial_step, ..Default::default() };
    let res = minimize(objective, &x0, &bounds, opts)?;

    let scaled = to_params(&res.point);
    let params = GarchParams { omega: scaled.omega * var, alpha: scaled.alpha, beta: scaled.beta };
    let diagnostics = FitDiagnostics {
        log_likelihood: Some(garch_log_likelihood(&params, u)),
        sse: None,
        iterations: res.iterations,
        evaluations: res.evaluations,
        converged: res.converged,
    };
    Ok((params, diagnostics))
}

/// Variance path `σ²_{n+1..n+h}`: step 1 from the recursion, then geometric
/// reversion to `V_L` at rate `α + β`.
pub fn garch_forecast(params: &GarchParams, last_u2: f64, last_sigma2: f64, horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    if !(last_u2 >= 0.0 && last_sigma2 >= 0.0) {
        return Err(Error::invalid("forecast state must be non-negative"));
    }
    let step1 = params.omega + params.alpha * last_u2 + params.beta * last_sigma2;
    let vl = params.v_long_run();
    let p = params.persistence();
    let mut out = Vec::with_capacity(horizon);
    out.push(step1);
    let mut decay = 1.0;
    for _ in 1..horizon {
        decay *= p;
        out.push(vl + decay * (step1 - vl));
    }
    Ok(out)
}

/// `u_t = σ_t z_t` with standard normal `z_t`; `σ²_1 = V_L`.
pub fn garch_simulate(params: &GarchParams, n: usize, seed: u64) -> ReturnSeries {
    ReturnSeries::from_values(garch_simulate_values(params, n, seed), Frequency::Daily)
}

pub fn garch_simulate_values(params: &GarchParams, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut s2 = params.v_long_run();
    for t in 0..n {
        if t > 0 {
            let prev: f64 = out[t - 1];
            s2 = params.omega + params.alpha * prev * prev + params.beta * s2;
        }
        let z: f64 = StandardNormal.sample(&mut rng);
        out.push(s2.sqrt() * z);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forecast_first_step() {
        let p = GarchParams::new(1e-6, 0.1, 0.8).unwrap();
        let f = garch_forecast(&p, 4e-4, 4e-4, 3).unwrap();
        assert!((f[0] - 3.61e-4).abs() < 1e-18);
    }

    #[test]
    fn forecast_reverts_to_long_run() {
        let p = GarchParams::new(1e-6, 0.1, 0.8).unwrap();
        assert!((p.v_long_run() - 1e-5).abs() < 1e-18);
        let f = garch_forecast(&p, 4e-4, 4e-4, 200).unwrap();
        assert!((f[199] - 1e-5).abs() < 1e-12);
        assert!(f.windows(2).all(|w| w[1] <= w[0]));
        let low = garch_forecast(&p, 0.0, 1e-6, 50).unwrap();
        assert!(low.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn long_run_is_a_fixed_point() {
        let p = GarchParams::new(2e-6, 0.07, 0.9).unwrap();
        let vl = p.v_long_run();
        for v in garch_forecast(&p, vl, vl, 20).unwrap() {
            assert!((v - vl).abs() <= 1e-15 * vl);
        }
    }

    #[test]
    fn invalid_params() {
        assert!(GarchParams::new(1e-6, 0.5, 0.5).is_err());
        assert!(GarchParams::new(0.0, 0.1, 0.5).is_err());
        assert!(GarchParams::new(1e-6, -0.1, 0.5).is_err());
    }

    #[test]
    fn simulation_basics() {
        let p = GarchParams::new(1e-6, 0.08, 0.9).unwrap();
        assert!(garch_simulate_values(&p, 0, 1).is_empty());
        assert_eq!(garch_simulate_values(&p, 100, 7), garch_simulate_values(&p, 100, 7));
        let x = garch_simulate_values(&p, 1_000_000, 3);
        let var = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
        assert!((var / 5e-5 - 1.0).abs() < 0.10, "variance {var}");
    }

    #[test]
    fn constant_returns_are_rejected() {
        assert!(garch_fit_values(&[0.01; 200], &FitOptions::default()).is_err());
        assert!(garch_fit_values(&[0.01; 20], &FitOptions::default()).is_err());
    }

    #[test]
    fn filter_matches_likelihood_recursion() {
        let p = GarchParams::new(1e-6, 0.08, 0.9).unwrap();
        let u = garch_simulate_values(&p, 500, 1);
        let s2 = garch_filter(&p, &u);
        let direct: f64 = u.iter().zip(&s2).map(|(u, s)| -0.5 * (LN_2PI + s.ln() + u * u / s)).sum();
        let ll = garch_log_likelihood(&p, &u);
        assert!(((direct - ll) / ll).abs() < 1e-12);
    }

    #[test]
    fn recovers_parameters() {
        let truth = GarchParams::new(1e-6, 0.08, 0.90).unwrap();
        for seed in [1u64, 2] {
            let u = garch_simulate_values(&truth, 50_000, seed);
            let (fit, diag) = garch_fit_values(&u, &FitOptions::default()).unwrap();
            assert!((fit.alpha - 0.08).abs() < 0.02 && (fit.beta - 0.90).abs() < 0.02, "{fit:?}");
            assert!(fit.persistence() < 1.0);
            assert!(diag.log_likelihood.unwrap() >= garch_log_likelihood(&truth, &u));
        }
    }
}
