//! Rolling-window out-of-sample forecasting and loss evaluation.
//!
//! At origin `o` (0-based, the last observation a forecast may use) a model
//! is fitted on `[o - window + 1, o]` and forecasts `rv[o + h]`. Origins run
//! from `window - 1` to `n - 1 - h`, giving `n - window - h + 1` records per
//! horizon. Between refits the most recent fit is reused but still conditions
//! on data up to the current origin.

pub mod loss;
pub mod table;

use chrono::NaiveDateTime;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::econometric::{
    garch_filter, garch_fit_values, garch_forecast, har_fit_values, har_forecast, rgarch_fit_values, rgarch_forecast,
    rgarch_state, FitOptions, GarchParams, HarParams, RealizedGarchParams,
};
use crate::error::{Error, Result};
use crate::ingest::{format_timestamp, RvSeries};
use crate::neural::{Architecture, CellKind, TrainConfig, TrainedNetwork};

pub use loss::{point_losses, qlike, PointLosses, Qlike, QlikeForm};
pub use table::{horizon_label, LossCell, LossTable};

/// Predictions below this are raised to it so QLIKE stays defined.
pub const PREDICTION_FLOOR: f64 = 1e-12;

/// Horizons of the multi-horizon sweep (days, with 30-day months).
pub const SWEEP_HORIZONS: [usize; 11] = [1, 2, 3, 4, 5, 6, 7, 14, 30, 60, 90];

pub const MODEL_NAMES: [&str; 6] = ["rnn", "lstm", "gru", "garch", "rgarch", "har"];

#[derive(Clone, Debug, PartialEq)]
pub struct NeuralSpec {
    /// `output_days` is replaced by the horizon of each cell.
    pub architecture: Architecture,
    pub train: TrainConfig,
}

impl NeuralSpec {
    pub fn default_for(kind: CellKind) -> Self {
        Self { architecture: Architecture::default_for(kind, 1), train: TrainConfig::default_for(kind) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Garch,
    Rgarch,
    Har,
    /// HAR with fixed coefficients; nothing is estimated.
    HarFixed(HarParams),
    Neural(NeuralSpec),
}

impl ModelSpec {
    pub fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "garch" => ModelSpec::Garch,
            "rgarch" => ModelSpec::Rgarch,
            "har" => ModelSpec::Har,
            "rnn" => ModelSpec::Neural(NeuralSpec::default_for(CellKind::Rnn)),
            "lstm" => ModelSpec::Neural(NeuralSpec::default_for(CellKind::Lstm)),
            "gru" => ModelSpec::Neural(NeuralSpec::default_for(CellKind::Gru)),
            other => {
                return Err(Error::Config(format!(
                    "unknown model `{other}`; valid models are {}",
                    MODEL_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Garch => "garch",
            ModelSpec::Rgarch => "rgarch",
            ModelSpec::Har | ModelSpec::HarFixed(_) => "har",
            ModelSpec::Neural(n) => n.architecture.kind.name(),
        }
    }

    pub fn is_neural(&self) -> bool {
        matches!(self, ModelSpec::Neural(_))
    }

    fn ordinal(&self) -> u64 {
        MODEL_NAMES.iter().position(|m| *m == self.name()).unwrap_or(MODEL_NAMES.len()) as u64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RollingSpec {
    pub window_size: usize,
    pub horizons: Vec<usize>,
    pub econometric_refit_every: usize,
    pub neural_refit_every: usize,
}

impl RollingSpec {
    pub fn new(window_size: usize, horizons: Vec<usize>) -> Self {
        Self { window_size, horizons, econometric_refit_every: 1, neural_refit_every: 20 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_size < 30 {
            return Err(Error::invalid(format!("window size must be at least 30, got {}", self.window_size)));
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(Error::invalid("horizons must be non-empty and each at least 1"));
        }
        if self.econometric_refit_every == 0 || self.neural_refit_every == 0 {
            return Err(Error::invalid("refit cadence must be at least 1"));
        }
        Ok(())
    }

    pub fn refit_every(&self, model: &ModelSpec) -> usize {
        if model.is_neural() {
            self.neural_refit_every
        } else {
            self.econometric_refit_every
        }
    }
}

/// One forecast's position in the sample (all 0-based indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    /// Last observation the forecast conditions on.
    pub origin: usize,
    pub target: usize,
    /// Inclusive bounds of the window the model in use was fitted on.
    pub fit_start: usize,
    pub fit_end: usize,
}

fn fit_end_for(origin: usize, window: usize, refit_every: usize) -> usize {
    let first = window - 1;
    first + (origin - first) / refit_every * refit_every
}

/// Forecast positions for one horizon.
pub fn rolling_origins(n: usize, window: usize, horizon: usize, refit_every: usize) -> Result<Vec<Origin>> {
    if window == 0 || horizon == 0 || refit_every == 0 {
        return Err(Error::invalid("window, horizon and refit cadence must be positive"));
    }
    if n < window + horizon {
        return Err(Error::InsufficientData { needed: window + horizon, got: n });
    }
    Ok((window - 1..n - horizon)
        .map(|origin| {
            let fit_end = fit_end_for(origin, window, refit_every);
            Origin { origin, target: origin + horizon, fit_start: fit_end + 1 - window, fit_end }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForecastRecord {
    pub position: Origin,
    pub timestamp: NaiveDateTime,
    pub predicted: f64,
    pub actual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForecastSet {
    pub model: String,
    pub horizon: usize,
    pub records: Vec<ForecastRecord>,
    /// Predictions raised to [`PREDICTION_FLOOR`].
    pub floored: usize,
    pub refit_every: usize,
    pub refits: usize,
    /// Seed of the cell's random stream (neural models only).
    pub seed: Option<u64>,
}

impl ForecastSet {
    pub fn predicted(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.predicted).collect()
    }

    pub fn actual(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.actual).collect()
    }

    pub fn point_losses(&self) -> Result<PointLosses> {
        point_losses(&self.predicted(), &self.actual())
    }

    pub fn qlike(&self, form: QlikeForm) -> Result<Qlike> {
        qlike(&self.predicted(), &self.actual(), form)
    }

    /// `timestamp,predicted,actual,origin,target,fit_start,fit_end`
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "timestamp,predicted,actual,origin,target,fit_start,fit_end")?;
        for r in &self.records {
            let p = r.position;
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                format_timestamp(&r.timestamp),
                r.predicted,
                r.actual,
                p.origin,
                p.target,
                p.fit_start,
                p.fit_end
            )?;
        }
        Ok(())
    }
}

/// Realized variance plus, optionally, the returns aligned with it.
#[derive(Clone, Debug)]
pub struct BacktestData {
    pub rv: RvSeries,
    returns: Vec<f64>,
}

impl BacktestData {
    /// Without returns, the GARCH family uses `sqrt(RV)` in their place; the
    /// likelihoods depend on returns only through their squares.
    pub fn new(rv: RvSeries, returns: Option<Vec<f64>>) -> Result<Self> {
        let returns = match returns {
            Some(r) if r.len() != rv.values().len() => {
                return Err(Error::Shape(format!("{} returns for {} RV values", r.len(), rv.values().len())))
            }
            Some(r) => r,
            None => rv.values().iter().map(|v| v.sqrt()).collect(),
        };
        Ok(Self { rv, returns })
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

/// Seed of the `(model, horizon)` cell: one ChaCha stream per cell.
pub fn cell_seed(seed: u64, model: &ModelSpec, horizon: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(model.ordinal() << 32 | horizon as u64);
    rng.next_u64()
}

struct Collector {
    sets: Vec<ForecastSet>,
}

impl Collector {
    fn new(model: &ModelSpec, spec: &RollingSpec, seed: u64) -> Self {
        let refit_every = spec.refit_every(model);
        let sets = spec
            .horizons
            .iter()
            .map(|&h| ForecastSet {
                model: model.name().to_string(),
                horizon: h,
                records: Vec::new(),
                floored: 0,
                refit_every,
                refits: 0,
                seed: model.is_neural().then(|| cell_seed(seed, model, h)),
            })
            .collect();
        Self { sets }
    }

    fn push(&mut self, cell: usize, position: Origin, raw: f64, rv: &RvSeries) -> Result<()> {
        if raw.is_nan() {
            return Err(Error::invalid(format!("model produced NaN at origin {}", position.origin)));
        }
        let set = &mut self.sets[cell];
        let predicted = if raw < PREDICTION_FLOOR {
            set.floored += 1;
            PREDICTION_FLOOR
        } else {
            raw
        };
        set.records.push(ForecastRecord {
            position,
            timestamp: rv.timestamps()[position.target],
            predicted,
            actual: rv.values()[position.target],
        });
        Ok(())
    }
}

enum Fitted {
    Garch(GarchParams),
    Rgarch(RealizedGarchParams),
    Har(HarParams),
}

/// Runs the rolling backtest of one model; returns one set per horizon, in
/// the order of `spec.horizons`.
pub fn rolling_forecast(model: &ModelSpec, data: &BacktestData, spec: &RollingSpec, seed: u64) -> Result<Vec<ForecastSet>> {
    spec.validate()?;
    let n = data.len();
    let w = spec.window_size;
    let max_h = *spec.horizons.iter().max().expect("validated non-empty");
    if n < w + max_h {
        return Err(Error::InsufficientData { needed: w + max_h, got: n });
    }
    let plans: Vec<Vec<Origin>> =
        spec.horizons.iter().map(|&h| rolling_origins(n, w, h, spec.refit_every(model))).collect::<Result<_>>()?;
    let mut out = Collector::new(model, spec, seed);
    match model {
        ModelSpec::Neural(ns) => neural_cells(ns, data, &plans, &mut out)?,
        _ => econometric_cells(model, data, spec, &plans, &mut out)?,
    }
    Ok(out.sets)
}

fn econometric_cells(
    model: &ModelSpec,
    data: &BacktestData,
    spec: &RollingSpec,
    plans: &[Vec<Origin>],
    out: &mut Collector,
) -> Result<()> {
    let x = data.rv.values();
    let r = data.returns();
    let w = spec.window_size;
    let refit_every = spec.refit_every(model);
    let min_h = *spec.horizons.iter().min().expect("validated non-empty");
    let mut cursor = vec![0usize; plans.len()];
    let mut fitted: Option<Fitted> = None;
    let mut refits = 0;

    for origin in w - 1..x.len() - min_h {
        let fit_end = fit_end_for(origin, w, refit_every);
        if fit_end == origin {
            let lo = origin + 1 - w;
            // the previous fit warm-starts the next one
            fitted = Some(match (model, &fitted) {
                (ModelSpec::Garch, prev) => {
                    let initial = match prev {
                        Some(Fitted::Garch(p)) => Some(*p),
                        _ => None,
                    };
                    Fitted::Garch(garch_fit_values(&r[lo..=origin], &FitOptions { initial, ..Default::default() })?.0)
                }
                (ModelSpec::Rgarch, prev) => {
                    let initial = match prev {
                        Some(Fitted::Rgarch(p)) => Some(*p),
                        _ => None,
                    };
                    let opts = FitOptions { initial, ..Default::default() };
                    Fitted::Rgarch(rgarch_fit_values(&r[lo..=origin], &x[lo..=origin], &opts)?.0)
                }
                (ModelSpec::Har, _) => Fitted::Har(har_fit_values(&x[lo..=origin])?.0),
                (ModelSpec::HarFixed(p), _) => Fitted::Har(*p),
                (ModelSpec::Neural(_), _) => unreachable!("neural models are handled separately"),
            });
            refits += 1;
        }
        let params = fitted.as_ref().expect("first origin always refits");

        let due: Vec<usize> = (0..plans.len())
            .filter(|&c| plans[c].get(cursor[c]).is_some_and(|p| p.origin == origin))
            .collect();
        let horizon = due.iter().map(|&c| spec.horizons[c]).max().unwrap_or(0);
        if horizon == 0 {
            continue;
        }
        // the model conditions on the current window, never past the origin
        let lo = origin + 1 - w;
        let path = match params {
            Fitted::Garch(p) => {
                let u = &r[lo..=origin];
                let s2 = garch_filter(p, u);
                let last = *u.last().expect("non-empty window");
                garch_forecast(p, last * last, *s2.last().expect("non-empty window"), horizon)?
            }
            Fitted::Rgarch(p) => {
                let state = rgarch_state(p, &r[lo..=origin], &x[lo..=origin]).expect("non-empty window");
                rgarch_forecast(p, &state, horizon)?
            }
            Fitted::Har(p) => har_forecast(p, &x[lo..=origin], horizon)?.values,
        };
        for c in due {
            let position = plans[c][cursor[c]];
            cursor[c] += 1;
            out.push(c, position, path[spec.horizons[c] - 1], &data.rv)?;
        }
    }
    for set in &mut out.sets {
        set.refits = refits;
    }
    Ok(())
}

fn neural_cells(ns: &NeuralSpec, data: &BacktestData, plans: &[Vec<Origin>], out: &mut Collector) -> Result<()> {
    let x = data.rv.values();
    for (c, plan) in plans.iter().enumerate() {
        let horizon = out.sets[c].horizon;
        let mut arch = ns.architecture.clone();
        arch.output_days = horizon;
        let seq = arch.sequence_length;
        let mut rng = ChaCha8Rng::seed_from_u64(out.sets[c].seed.expect("neural cells carry a seed"));
        let mut net: Option<(usize, TrainedNetwork)> = None;
        let mut refits = 0;
        for &position in plan {
            if net.as_ref().is_none_or(|(end, _)| *end != position.fit_end) {
                let train = TrainConfig { seed: rng.next_u64(), ..ns.train.clone() };
                let fitted = TrainedNetwork::fit(arch.clone(), &x[position.fit_start..=position.fit_end], &train)?;
                net = Some((position.fit_end, fitted));
                refits += 1;
            }
            let (_, fitted) = net.as_ref().expect("fitted above");
            let o = position.origin;
            let forecast = fitted.predict(&x[o + 1 - seq..=o])?;
            out.push(c, position, forecast[horizon - 1], &data.rv)?;
        }
        out.sets[c].refits = refits;
    }
    Ok(())
}

/// Rolling forecasts of every model at every horizon, plus the loss grid.
pub fn horizon_sweep(
    models: &[ModelSpec],
    data: &BacktestData,
    spec: &RollingSpec,
    seed: u64,
) -> Result<(LossTable, Vec<ForecastSet>)> {
    let mut sets = Vec::new();
    for m in models {
        sets.extend(rolling_forecast(m, data, spec, seed)?);
    }
    let table = LossTable::from_sets(&sets, &spec.horizons)?;
    Ok((table, sets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Frequency;

    fn data(values: Vec<f64>) -> BacktestData {
        BacktestData::new(RvSeries::from_values(values, Frequency::Daily).unwrap(), None).unwrap()
    }

    #[test]
    fn counting() {
        assert_eq!(rolling_origins(100, 90, 1, 1).unwrap().len(), 10);
        assert_eq!(rolling_origins(5776, 4077, 1, 1).unwrap().len(), 1699);
        assert!(rolling_origins(90, 90, 1, 1).is_err());
        let o = rolling_origins(100, 90, 3, 4).unwrap();
        assert_eq!(o[0], Origin { origin: 89, target: 92, fit_start: 0, fit_end: 89 });
        assert_eq!(o[5], Origin { origin: 94, target: 97, fit_start: 4, fit_end: 93 });
    }

    #[test]
    fn constant_series_with_fixed_point_har() {
        let p = HarParams::new(0.0, 0.5, 0.3, 0.2);
        let d = data(vec![2.5e-4; 120]);
        let spec = RollingSpec::new(60, vec![1, 5]);
        let sets = rolling_forecast(&ModelSpec::HarFixed(p), &d, &spec, 0).unwrap();
        for s in &sets {
            assert_eq!(s.records.len(), 120 - 60 - s.horizon + 1);
            assert!(s.records.iter().all(|r| (r.predicted - 2.5e-4).abs() < 1e-18));
            let l = s.point_losses().unwrap();
            assert!(l.mse < 1e-30 && l.mae < 1e-15 && l.mape < 1e-12);
            assert!(s.qlike(QlikeForm::Canonical).unwrap().value < 1e-12);
        }
    }

    #[test]
    fn records_follow_the_plan_and_precede_targets() {
        let truth = HarParams::new(1e-5, 0.4, 0.3, 0.2);
        let x = crate::econometric::har_simulate(&truth, &[1e-4; 22], 300, 1e-5, 3).unwrap();
        let d = data(x);
        let mut spec = RollingSpec::new(120, vec![1, 3, 7]);
        spec.econometric_refit_every = 5;
        for model in [ModelSpec::Har, ModelSpec::Garch] {
            let sets = rolling_forecast(&model, &d, &spec, 1).unwrap();
            for s in &sets {
                let plan = rolling_origins(d.len(), 120, s.horizon, 5).unwrap();
                let got: Vec<Origin> = s.records.iter().map(|r| r.position).collect();
                assert_eq!(got, plan);
                assert!(s.records.iter().all(|r| r.position.fit_end < r.position.target && r.predicted > 0.0));
                assert_eq!(s.refits, (d.len() - 120 - 1) / 5 + 1);
            }
        }
    }

    #[test]
    fn econometric_cells_are_reproducible() {
        let p = GarchParams::new(1e-6, 0.08, 0.9).unwrap();
        let u = crate::econometric::garch::garch_simulate_values(&p, 400, 2);
        let rv = RvSeries::from_values(u.iter().map(|v| v * v).collect(), Frequency::Daily).unwrap();
        let d = BacktestData::new(rv, Some(u)).unwrap();
        let spec = RollingSpec::new(300, vec![1, 10]);
        let a = rolling_forecast(&ModelSpec::Garch, &d, &spec, 0).unwrap();
        let b = rolling_forecast(&ModelSpec::Garch, &d, &spec, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_model_lists_valid_names() {
        let e = ModelSpec::from_name("arima").unwrap_err().to_string();
        for m in MODEL_NAMES {
            assert!(e.contains(m), "{e}");
        }
    }

    #[test]
    fn too_short() {
        let d = data(vec![1.0; 50]);
        assert!(rolling_forecast(&ModelSpec::Har, &d, &RollingSpec::new(45, vec![10]), 0).is_err());
        assert!(rolling_forecast(&ModelSpec::Har, &d, &RollingSpec::new(20, vec![1]), 0).is_err());
    }
}
