//! Command implementations behind the `rvcast` binary: `summarize`,
//! `backtest` and `plot`. Each reads a JSON [`RunConfig`] and writes into an
//! output directory:
//!
//! ```text
//! <out>/summary.csv
//! <out>/forecasts/<model>_<horizon>.csv
//! <out>/losses.csv
//! <out>/losses.json
//! <out>/meta.json
//! <out>/plots/*.svg
//! ```

pub mod config;
pub mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{InputKind, ModelConfig, RunConfig};

use crate::backtest::{rolling_forecast, BacktestData, ForecastSet, LossTable, ModelSpec};
use crate::error::{Error, Result};
use crate::ingest::{bucket_returns, log_returns, rv_aggregate, rv_from_squared_returns, Frequency, PriceSeries, RvSeries};
use crate::stats::{schwert_lag, SummaryRow, SUMMARY_HEADER};

/// RV and, when prices were given, the returns aligned with it.
pub struct LoadedData {
    pub rv: RvSeries,
    pub returns: Option<Vec<f64>>,
    /// Native-frequency returns, for the summary table.
    pub raw_returns: Option<Vec<f64>>,
}

pub fn load_data(cfg: &RunConfig) -> Result<LoadedData> {
    match cfg.input {
        InputKind::Rv => Ok(LoadedData { rv: RvSeries::from_csv_path(&cfg.data, cfg.frequency)?, returns: None, raw_returns: None }),
        InputKind::Prices => {
            let prices = PriceSeries::from_csv_path(&cfg.data, cfg.frequency)?;
            let r = log_returns(&prices);
            let bucket = cfg.rv_frequency();
            let (rv, returns) = if bucket == cfg.frequency {
                (rv_from_squared_returns(&r), r.returns().to_vec())
            } else {
                (rv_aggregate(&r, bucket)?, bucket_returns(&r, bucket)?.returns().to_vec())
            };
            Ok(LoadedData { rv, returns: Some(returns), raw_returns: Some(r.returns().to_vec()) })
        }
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))
}

/// Diagnostics for the return series (when prices were given) and the RV
/// series; writes `<out>/summary.csv`.
pub fn cmd_summarize(cfg: &RunConfig, out: &Path) -> Result<Vec<SummaryRow>> {
    let data = load_data(cfg)?;
    let lb = cfg.lb_lags.unwrap_or(20);
    let arch = cfg.arch_lags.unwrap_or(5);
    let mut rows = Vec::new();
    if let Some(r) = &data.raw_returns {
        rows.push(SummaryRow::compute("return", r, lb, arch, cfg.adf_lag.unwrap_or_else(|| schwert_lag(r.len())))?);
    }
    let x = data.rv.values();
    rows.push(SummaryRow::compute("rv", x, lb, arch, cfg.adf_lag.unwrap_or_else(|| schwert_lag(x.len())))?);
    create_dir(out)?;
    let mut csv = String::from(SUMMARY_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv_row());
        csv.push('\n');
    }
    fs::write(out.join("summary.csv"), csv)?;
    Ok(rows)
}

/// Fixed-width console rendering of summary rows.
pub fn render_summary(rows: &[SummaryRow]) -> String {
    let mut s = format!(
        "{:<8} {:>7} {:>11} {:>11} {:>9} {:>9} {:>10} {:>10} {:>10}\n",
        "series", "obs", "mean", "sd", "skew", "kurt", "jb_p", "lb_p", "adf"
    );
    for r in rows {
        let p = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        s.push_str(&format!(
            "{:<8} {:>7} {:>11.4e} {:>11.4e} {:>9.3} {:>9.3} {:>10} {:>10} {:>10.3}\n",
            r.series,
            r.stats.n,
            r.stats.mean,
            r.stats.sd,
            r.stats.skewness,
            r.stats.kurtosis,
            p(r.jarque_bera.p_value),
            p(r.ljung_box.p_value),
            r.adf.statistic
        ));
    }
    s
}

#[derive(Serialize)]
struct ModelMeta {
    name: String,
    refit_every: usize,
    refits: BTreeMap<usize, usize>,
    floored: BTreeMap<usize, usize>,
    seeds: BTreeMap<usize, u64>,
    settings: String,
}

#[derive(Serialize)]
struct RunMeta {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    observations: usize,
    rv_frequency: Frequency,
    window_size: usize,
    horizons: Vec<usize>,
    gradient_clip_norm: f64,
    prediction_floor: f64,
    models: Vec<ModelMeta>,
    notes: Vec<&'static str>,
}

const NOTES: [&str; 4] = [
    "records per horizon = n - window - h + 1; forecasts at origin o use observations up to o only",
    "qlike_raw = mean(ln h + s2/h - 1); qlike_canonical = mean(s2/h - ln(s2/h) - 1), zero actuals excluded",
    "mape is a ratio; zero actuals are excluded and counted",
    "predictions below the floor are raised to it and counted",
];

pub struct BacktestOutput {
    pub table: LossTable,
    pub sets: Vec<ForecastSet>,
    pub files: Vec<PathBuf>,
}

/// Rolling backtest of every configured model and horizon.
pub fn cmd_backtest(cfg: &RunConfig, out: &Path) -> Result<BacktestOutput> {
    let models = cfg.model_configs()?;
    let mut seen = Vec::new();
    for m in &models {
        let name = m.to_spec()?.name();
        if seen.contains(&name) {
            return Err(Error::Config(format!("model `{name}` is listed twice")));
        }
        seen.push(name);
    }
    let loaded = load_data(cfg)?;
    let n = loaded.rv.values().len();
    let data = BacktestData::new(loaded.rv, loaded.returns)?;

    let mut sets = Vec::new();
    let mut metas = Vec::new();
    for mc in &models {
        let spec = mc.to_spec()?;
        let rolling = cfg.rolling_spec(n, mc);
        let cell_sets = rolling_forecast(&spec, &data, &rolling, cfg.seed)?;
        metas.push(ModelMeta {
            name: spec.name().to_string(),
            refit_every: rolling.refit_every(&spec),
            refits: cell_sets.iter().map(|s| (s.horizon, s.refits)).collect(),
            floored: cell_sets.iter().map(|s| (s.horizon, s.floored)).collect(),
            seeds: cell_sets.iter().filter_map(|s| s.seed.map(|v| (s.horizon, v))).collect(),
            settings: describe(&spec),
        });
        sets.extend(cell_sets);
    }
    let table = LossTable::from_sets(&sets, &cfg.horizons)?;

    let mut files = Vec::new();
    let fdir = out.join("forecasts");
    create_dir(&fdir)?;
    for s in &sets {
        let path = fdir.join(format!("{}_{}.csv", s.model, s.horizon));
        let mut buf = Vec::new();
        s.write_csv(&mut buf)?;
        fs::write(&path, buf)?;
        files.push(path);
    }
    let meta = RunMeta {
        tool: "rvcast",
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        observations: n,
        rv_frequency: data.rv.frequency(),
        window_size: cfg.window(n),
        horizons: cfg.horizons.clone(),
        gradient_clip_norm: 1.0,
        prediction_floor: crate::backtest::PREDICTION_FLOOR,
        models: metas,
        notes: NOTES.to_vec(),
    };
    for (name, body) in [
        ("losses.csv", table.to_csv()),
        ("losses.json", table.to_json()?),
        ("meta.json", serde_json::to_string_pretty(&meta)?),
    ] {
        let path = out.join(name);
        fs::write(&path, body)?;
        files.push(path);
    }
    files.extend(cmd_plot(out)?);
    Ok(BacktestOutput { table, sets, files })
}

fn describe(spec: &ModelSpec) -> String {
    match spec {
        ModelSpec::Neural(n) => {
            let a = &n.architecture;
            let t = &n.train;
            format!(
                "units {}, dense {:?}, seq {}, dropout {}, epochs {}, batch {}, lr {}, patience {}",
                a.hidden_units, a.dense_units, a.sequence_length, a.dropout_rate, t.epochs, t.batch_size, t.learning_rate, t.early_stop_patience
            )
        }
        other => other.name().to_string(),
    }
}

fn read_forecast_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let (mut pred, mut actual) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse { line: i as u64 + 2, message: e.to_string() })?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse { line: i as u64 + 2, message: format!("{}: bad number in column {}", path.display(), k + 1) })
        };
        pred.push(num(1)?);
        actual.push(num(2)?);
    }
    if pred.is_empty() {
        return Err(Error::invalid(format!("forecast file {} is empty", path.display())));
    }
    Ok((pred, actual))
}

/// Writes one actual-vs-predicted chart per forecast file and one
/// loss-by-horizon chart per loss family into `<out>/plots`.
pub fn cmd_plot(out: &Path) -> Result<Vec<PathBuf>> {
    let fdir = out.join("forecasts");
    let mut inputs: Vec<PathBuf> = fs::read_dir(&fdir)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", fdir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    inputs.sort();
    if inputs.is_empty() {
        return Err(Error::Config(format!("no forecast files in {}", fdir.display())));
    }
    let pdir = out.join("plots");
    create_dir(&pdir)?;
    let mut written = Vec::new();
    for path in &inputs {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("forecast");
        let (pred, actual) = read_forecast_csv(path)?;
        let target = pdir.join(format!("{stem}.svg"));
        fs::write(&target, svg::forecast_svg(stem, &actual, &pred)?)?;
        written.push(target);
    }

    let losses = out.join("losses.csv");
    if losses.exists() {
        let text = fs::read_to_string(&losses)?;
        let cells = LossTable::parse_csv(&text)?;
        let header = text.lines().next().unwrap_or_default();
        let labels: Vec<String> = header.split(',').skip(2).map(String::from).collect();
        let mut families: Vec<String> = Vec::new();
        for (loss, ..) in &cells {
            if !families.contains(loss) {
                families.push(loss.clone());
            }
        }
        for family in families {
            let mut models: Vec<String> = Vec::new();
            for (loss, model, ..) in &cells {
                if *loss == family && !models.contains(model) {
                    models.push(model.clone());
                }
            }
            let series: Vec<(String, Vec<Option<f64>>)> = models
                .iter()
                .map(|m| {
                    let values = labels
                        .iter()
                        .map(|l| cells.iter().find(|c| c.0 == family && &c.1 == m && &c.2 == l).map(|c| c.3))
                        .collect();
                    (m.clone(), values)
                })
                .collect();
            let target = pdir.join(format!("trend_{family}.svg"));
            fs::write(&target, svg::trend_svg(&family, &labels, &series)?)?;
            written.push(target);
        }
    }
    Ok(written)
}
