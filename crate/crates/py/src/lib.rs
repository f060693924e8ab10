//! Python bindings for `rvcast-core`: descriptive tests, the econometric
//! models, the recurrent networks, the loss functions and the CLI commands.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rvcast_core::backtest::{self, QlikeForm};
use rvcast_core::econometric::{self, FitOptions, FittedModel, GarchParams, HarParams};
use rvcast_core::neural::{Architecture, CellKind, Checkpoint, TrainConfig, TrainedNetwork};
use rvcast_core::{cli, stats};

fn err(e: rvcast_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn test_result<'py>(py: Python<'py>, r: stats::TestResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("statistic", r.statistic)?;
    d.set_item("p_value", r.p_value)?;
    d.set_item("decision", r.decision_note)?;
    Ok(d)
}

fn fitted<'py>(py: Python<'py>, f: FittedModel) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("model", f.model)?;
    d.set_item("params", f.params)?;
    d.set_item("loglik", f.loglik)?;
    d.set_item("converged", f.converged)?;
    Ok(d)
}

fn cell_kind(name: &str) -> PyResult<CellKind> {
    CellKind::ALL
        .into_iter()
        .find(|k| k.name() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown network `{name}`; expected rnn, lstm or gru")))
}

/// Mean, sd, min, max, skewness and excess kurtosis.
#[pyfunction]
fn summarize(py: Python<'_>, x: Vec<f64>) -> PyResult<Bound<'_, PyDict>> {
    let s = stats::summarize(&x).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("n", s.n)?;
    d.set_item("mean", s.mean)?;
    d.set_item("sd", s.sd)?;
    d.set_item("min", s.min)?;
    d.set_item("max", s.max)?;
    d.set_item("skewness", s.skewness)?;
    d.set_item("kurtosis", s.kurtosis)?;
    Ok(d)
}

#[pyfunction]
fn jarque_bera(py: Python<'_>, x: Vec<f64>) -> PyResult<Bound<'_, PyDict>> {
    test_result(py, stats::jarque_bera(&x).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (x, lags=20))]
fn ljung_box(py: Python<'_>, x: Vec<f64>, lags: usize) -> PyResult<Bound<'_, PyDict>> {
    test_result(py, stats::ljung_box(&x, lags).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (x, lags=5))]
fn arch_lm(py: Python<'_>, x: Vec<f64>, lags: usize) -> PyResult<Bound<'_, PyDict>> {
    test_result(py, stats::arch_lm(&x, lags).map_err(err)?)
}

/// ADF t-statistic; the lag order defaults to Schwert's rule.
#[pyfunction]
#[pyo3(signature = (x, max_lag=None))]
fn adf(py: Python<'_>, x: Vec<f64>, max_lag: Option<usize>) -> PyResult<Bound<'_, PyDict>> {
    let lag = max_lag.unwrap_or_else(|| stats::schwert_lag(x.len()));
    test_result(py, stats::adf(&x, lag).map_err(err)?)
}

#[pyfunction]
fn garch_fit(py: Python<'_>, returns: Vec<f64>) -> PyResult<Bound<'_, PyDict>> {
    let (p, d) = econometric::garch_fit_values(&returns, &FitOptions::default()).map_err(err)?;
    fitted(py, FittedModel::garch(&p, &d))
}

/// Variance forecasts for steps `1..=horizon` from the last squared return
/// and conditional variance.
#[pyfunction]
fn garch_forecast(omega: f64, alpha: f64, beta: f64, last_u2: f64, last_sigma2: f64, horizon: usize) -> PyResult<Vec<f64>> {
    let p = GarchParams::new(omega, alpha, beta).map_err(err)?;
    econometric::garch_forecast(&p, last_u2, last_sigma2, horizon).map_err(err)
}

#[pyfunction]
fn garch_simulate(omega: f64, alpha: f64, beta: f64, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    let p = GarchParams::new(omega, alpha, beta).map_err(err)?;
    Ok(econometric::garch_simulate(&p, n, seed).returns().to_vec())
}

#[pyfunction]
fn rgarch_fit(py: Python<'_>, returns: Vec<f64>, rv: Vec<f64>) -> PyResult<Bound<'_, PyDict>> {
    let (p, d) = econometric::rgarch_fit_values(&returns, &rv, &FitOptions::default()).map_err(err)?;
    fitted(py, FittedModel::rgarch(&p, &d))
}

#[pyfunction]
fn har_fit(py: Python<'_>, rv: Vec<f64>) -> PyResult<Bound<'_, PyDict>> {
    let (p, d) = econometric::har_fit_values(&rv).map_err(err)?;
    fitted(py, FittedModel::har(&p, &d))
}

/// Iterated HAR forecasts for steps `1..=horizon` after `history`.
#[pyfunction]
fn har_forecast(betas: [f64; 4], history: Vec<f64>, horizon: usize) -> PyResult<Vec<f64>> {
    let p = HarParams::new(betas[0], betas[1], betas[2], betas[3]);
    Ok(econometric::har_forecast(&p, &history, horizon).map_err(err)?.values)
}

#[pyfunction]
#[pyo3(signature = (betas, initial, n, noise_sd=0.0, seed=0))]
fn har_simulate(betas: [f64; 4], initial: Vec<f64>, n: usize, noise_sd: f64, seed: u64) -> PyResult<Vec<f64>> {
    let p = HarParams::new(betas[0], betas[1], betas[2], betas[3]);
    econometric::har_simulate(&p, &initial, n, noise_sd, seed).map_err(err)
}

#[pyfunction]
fn point_losses(py: Python<'_>, predicted: Vec<f64>, actual: Vec<f64>) -> PyResult<Bound<'_, PyDict>> {
    let l = backtest::point_losses(&predicted, &actual).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mse", l.mse)?;
    d.set_item("rmse", l.rmse)?;
    d.set_item("mape", l.mape)?;
    d.set_item("mae", l.mae)?;
    d.set_item("mape_excluded", l.mape_excluded)?;
    Ok(d)
}

/// `form` is "canonical" (default) or "raw".
#[pyfunction]
#[pyo3(signature = (predicted, actual, form="canonical"))]
fn qlike(predicted: Vec<f64>, actual: Vec<f64>, form: &str) -> PyResult<f64> {
    let form = match form {
        "canonical" => QlikeForm::Canonical,
        "raw" => QlikeForm::Raw,
        other => return Err(PyValueError::new_err(format!("unknown qlike form `{other}`"))),
    };
    Ok(backtest::qlike(&predicted, &actual, form).map_err(err)?.value)
}

/// Trained recurrent network with its input scaler.
#[pyclass(module = "rvcast")]
struct Network {
    inner: TrainedNetwork,
}

#[pymethods]
impl Network {
    /// Trains `kind` ("rnn", "lstm" or "gru") on `values` with the default
    /// architecture and training settings unless overridden.
    #[staticmethod]
    #[pyo3(signature = (kind, values, output_days=1, epochs=None, hidden_units=None, seed=0))]
    fn fit(
        kind: &str,
        values: Vec<f64>,
        output_days: usize,
        epochs: Option<usize>,
        hidden_units: Option<usize>,
        seed: u64,
    ) -> PyResult<Self> {
        let kind = cell_kind(kind)?;
        let mut arch = Architecture::default_for(kind, output_days);
        if let Some(u) = hidden_units {
            arch.hidden_units = u;
        }
        let mut cfg = TrainConfig::default_for(kind);
        cfg.seed = seed;
        if let Some(e) = epochs {
            cfg.epochs = e;
        }
        Ok(Self { inner: TrainedNetwork::fit(arch, &values, &cfg).map_err(err)? })
    }

    /// Forecasts for the next `output_days` steps from the last
    /// `sequence_length` values.
    fn predict(&self, recent: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.predict(&recent).map_err(err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.model.kind().name()
    }

    #[getter]
    fn sequence_length(&self) -> usize {
        self.inner.model.architecture().sequence_length
    }

    /// Per-epoch training loss.
    #[getter]
    fn history(&self) -> Vec<f64> {
        self.inner.history.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        Checkpoint::from_network(&self.inner).to_json().map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = Checkpoint::from_json(text).and_then(Checkpoint::into_network).map_err(err)?;
        Ok(Self { inner })
    }
}

fn load_config(config: PathBuf, seed: Option<u64>) -> PyResult<cli::RunConfig> {
    let mut cfg = cli::RunConfig::load(&config).map_err(err)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Runs the rolling backtest described by a JSON config and returns the
/// loss table as CSV text; files are written under `out`.
#[pyfunction]
#[pyo3(signature = (config, out, seed=None))]
fn run_backtest(py: Python<'_>, config: PathBuf, out: PathBuf, seed: Option<u64>) -> PyResult<String> {
    let cfg = load_config(config, seed)?;
    let table = py.detach(|| cli::cmd_backtest(&cfg, &out)).map_err(err)?.table;
    Ok(table.to_csv())
}

/// Writes `summary.csv` under `out` and returns one statistics map per series.
#[pyfunction]
fn run_summarize(config: PathBuf, out: PathBuf) -> PyResult<Vec<BTreeMap<String, String>>> {
    let cfg = load_config(config, None)?;
    let rows = cli::cmd_summarize(&cfg, &out).map_err(err)?;
    let header: Vec<&str> = stats::SUMMARY_HEADER.split(',').collect();
    Ok(rows
        .iter()
        .map(|r| header.iter().map(|h| h.to_string()).zip(r.csv_row().split(',').map(String::from)).collect())
        .collect())
}

#[pymodule]
fn rvcast(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(jarque_bera, m)?)?;
    m.add_function(wrap_pyfunction!(ljung_box, m)?)?;
    m.add_function(wrap_pyfunction!(arch_lm, m)?)?;
    m.add_function(wrap_pyfunction!(adf, m)?)?;
    m.add_function(wrap_pyfunction!(garch_fit, m)?)?;
    m.add_function(wrap_pyfunction!(garch_forecast, m)?)?;
    m.add_function(wrap_pyfunction!(garch_simulate, m)?)?;
    m.add_function(wrap_pyfunction!(rgarch_fit, m)?)?;
    m.add_function(wrap_pyfunction!(har_fit, m)?)?;
    m.add_function(wrap_pyfunction!(har_forecast, m)?)?;
    m.add_function(wrap_pyfunction!(har_simulate, m)?)?;
    m.add_function(wrap_pyfunction!(point_losses, m)?)?;
    m.add_function(wrap_pyfunction!(qlike, m)?)?;
    m.add_function(wrap_pyfunction!(run_backtest, m)?)?;
    m.add_function(wrap_pyfunction!(run_summarize, m)?)?;
    m.add_class::<Network>()?;
    Ok(())
}
