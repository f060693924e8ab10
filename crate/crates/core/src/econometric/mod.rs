//! Econometric volatility models: GARCH(1,1), realized GARCH and HAR, plus
//! the simplex optimizer the likelihood fits share.

pub mod garch;
pub mod har;
pub mod optimize;
pub mod rgarch;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use garch::{garch_filter, garch_fit, garch_fit_values, garch_forecast, garch_log_likelihood, garch_simulate, GarchParams};
pub use har::{har_features, har_fit, har_fit_values, har_forecast, har_simulate, HarForecast, HarParams};
pub use optimize::{minimize, Bound, OptimizeOptions, OptimizeResult};
pub use rgarch::{
    rgarch_filter, rgarch_fit, rgarch_fit_values, rgarch_forecast, rgarch_log_likelihood, rgarch_simulate,
    rgarch_state, RealizedGarchParams, RgarchState,
};

/// Lower bound applied to conditional variances inside likelihood recursions.
pub const VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub log_likelihood: Option<f64>,
    pub sse: Option<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct FitOptions<P> {
    pub max_evaluations: usize,
    /// Starting simplex edge in transformed coordinates.
    pub initial_step: f64,
    /// Warm start; `None` uses a generic starting point.
    pub initial: Option<P>,
}

impl<P> Default for FitOptions<P> {
    fn default() -> Self {
        Self { max_evaluations: 10_000, initial_step: 0.1, initial: None }
    }
}

/// Serialized form of a fitted model: `{model, params, loglik, converged}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FittedModel {
    pub model: String,
    pub params: BTreeMap<String, f64>,
    pub loglik: Option<f64>,
    pub converged: bool,
}

impl FittedModel {
    pub fn garch(p: &GarchParams, d: &FitDiagnostics) -> Self {
        Self::build("garch", &[("omega", p.omega), ("alpha", p.alpha), ("beta", p.beta)], d)
    }

    pub fn rgarch(p: &RealizedGarchParams, d: &FitDiagnostics) -> Self {
        Self::build(
            "rgarch",
            &[
                ("omega", p.omega),
                ("alpha", p.alpha),
                ("beta", p.beta),
                ("gamma", p.gamma),
                ("xi", p.xi),
                ("phi", p.phi),
                ("sigma_u", p.sigma_u),
            ],
            d,
        )
    }

    pub fn har(p: &HarParams, d: &FitDiagnostics) -> Self {
        Self::build("har", &[("beta0", p.beta0), ("beta1", p.beta1), ("beta2", p.beta2), ("beta3", p.beta3)], d)
    }

    fn build(model: &str, values: &[(&str, f64)], d: &FitDiagnostics) -> Self {
        Self {
            model: model.to_string(),
            params: values.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            loglik: d.log_likelihood.filter(|v| v.is_finite()),
            converged: d.converged,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain map serializes")
    }
}
