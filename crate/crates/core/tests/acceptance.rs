//! Acceptance suite: one PASS/FAIL line per criterion, written straight to
//! stderr so it shows up even when test output is captured.

mod common;

use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{finite_difference_check, grad_check_model, normal_equations, relative_error, synthetic_har_rv};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rvcast_core::backtest::{
    horizon_sweep, point_losses, qlike, rolling_forecast, rolling_origins, BacktestData, LossTable, ModelSpec,
    QlikeForm, RollingSpec, MODEL_NAMES, SWEEP_HORIZONS,
};
use rvcast_core::cli::{cmd_backtest, RunConfig};
use rvcast_core::econometric::{
    garch_fit, garch_log_likelihood, garch_simulate, har_fit_values, har_simulate, FitOptions, GarchParams, HarParams,
};
use rvcast_core::ingest::{Frequency, RvSeries};
use rvcast_core::linalg::ols;
use rvcast_core::neural::CellKind;
use rvcast_core::stats::{adf, arch_lm, jarque_bera, ljung_box, schwert_lag};

const SYNTHETIC_LEN: usize = 5776;
const SYNTHETIC_SEED: u64 = 2024;
const DAILY_WINDOW: usize = 4077;

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!("acceptance {id} {name}: {} | {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "{line}");
}

fn synthetic_data() -> BacktestData {
    let rv = RvSeries::from_values(synthetic_har_rv(SYNTHETIC_LEN, SYNTHETIC_SEED), Frequency::Daily).unwrap();
    BacktestData::new(rv, None).unwrap()
}

/// GARCH and HAR across every sweep horizon on the synthetic series, shared
/// by the loss-identity and horizon-trend checks.
fn econometric_sweep() -> &'static (LossTable, Duration) {
    static SWEEP: OnceLock<(LossTable, Duration)> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let start = Instant::now();
        let spec = RollingSpec::new(DAILY_WINDOW, SWEEP_HORIZONS.to_vec());
        let (table, _) = horizon_sweep(&[ModelSpec::Garch, ModelSpec::Har], &synthetic_data(), &spec, SYNTHETIC_SEED).unwrap();
        (table, start.elapsed())
    })
}

#[test]
fn gradient_fidelity() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_small = 0.0f64;
    let mut pass = true;
    let mut parameters = 0;
    for kind in CellKind::ALL {
        let (model, data) = grad_check_model(kind, 7);
        let check = finite_difference_check(&model, &data, 1e-5);
        worst = worst.max(check.worst_relative);
        worst_small = worst_small.max(check.worst_absolute_small);
        parameters += check.parameters;
        pass &= check.passes();
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 10.0;
    report(
        1,
        "gradient fidelity",
        pass,
        &format!("rnn/lstm/gru, 4 units, seq 12: {parameters} parameters, worst relative error {worst:.2e} (< 1e-4), worst absolute on |g| < 1e-10 {worst_small:.2e}, {secs:.2} s (< 10 s)"),
    );
}

#[test]
fn garch_recovery() {
    let start = Instant::now();
    let truth = GarchParams::new(1e-6, 0.08, 0.90).unwrap();
    let mut within = 0;
    let mut loglik_ok = 0;
    let mut worst = (0.0f64, 0.0f64);
    for seed in 0..10u64 {
        let r = garch_simulate(&truth, 50_000, 1000 + seed);
        let (fit, _) = garch_fit(&r, &FitOptions::default()).unwrap();
        let (da, db) = ((fit.alpha - truth.alpha).abs(), (fit.beta - truth.beta).abs());
        worst = (worst.0.max(da), worst.1.max(db));
        if da <= 0.02 && db <= 0.02 {
            within += 1;
        }
        if garch_log_likelihood(&fit, r.returns()) >= garch_log_likelihood(&truth, r.returns()) {
            loglik_ok += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = within >= 9 && loglik_ok == 10 && secs < 120.0;
    report(
        2,
        "garch recovery",
        pass,
        &format!("alpha and beta within 0.02 in {within}/10 (>= 9), worst |da| {:.4}, |db| {:.4}; fitted loglik >= true in {loglik_ok}/10; {secs:.1} s (< 120 s)", worst.0, worst.1),
    );
}

#[test]
fn har_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut worst_har = 0.0f64;
    for case in 0..10 {
        let b1 = rng.random_range(0.1..0.5);
        let b2 = rng.random_range(0.1..0.3);
        let b3 = rng.random_range(0.05..0.15);
        let truth = HarParams::new(rng.random_range(1e-6..2e-5), b1, b2, b3);
        let init: Vec<f64> = (0..22).map(|_| 1e-4 * rng.random_range(0.5..1.5)).collect();
        let rv = har_simulate(&truth, &init, 40 + 5 * case, 0.0, 0).unwrap();
        let (fit, _) = har_fit_values(&rv).unwrap();
        for (got, want) in [fit.beta0, fit.beta1, fit.beta2, fit.beta3].into_iter().zip([truth.beta0, b1, b2, b3]) {
            worst_har = worst_har.max(relative_error(got, want));
        }
    }

    let mut worst_ols = 0.0f64;
    for _ in 0..50 {
        let k = rng.random_range(1..=6);
        let n = rng.random_range(k + 5..=500);
        let beta: Vec<f64> =
            (0..k).map(|_| rng.random_range(0.5..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let mut x = Vec::with_capacity(n * k);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..k).map(|j| if j == 0 { 1.0 } else { rng.random_range(-3.0..3.0) }).collect();
            let noise: f64 = StandardNormal.sample(&mut rng);
            y.push(row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + 0.1 * noise);
            x.extend(row);
        }
        let fit = ols(&x, n, k, &y).unwrap();
        let (oracle, _) = normal_equations(&x, n, k, &y);
        for (got, want) in fit.coefficients.iter().zip(&oracle) {
            worst_ols = worst_ols.max(relative_error(*got, *want));
        }
    }
    report(
        3,
        "har exactness",
        worst_har < 1e-8 && worst_ols < 1e-8,
        &format!("noise-free recovery worst relative error {worst_har:.2e} (< 1e-8) over 10 paths; OLS vs normal equations worst {worst_ols:.2e} (< 1e-8) over 50 instances, n <= 500"),
    );
}

#[test]
fn loss_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut perfect_ok = true;
    let mut imperfect_ok = true;
    for _ in 0..500 {
        let n = rng.random_range(1..50);
        let scale = 10f64.powf(rng.random_range(-9.0..2.0));
        let actual: Vec<f64> = (0..n).map(|_| scale * rng.random_range(0.01..5.0)).collect();
        let p = point_losses(&actual, &actual).unwrap();
        let q = qlike(&actual, &actual, QlikeForm::Canonical).unwrap();
        perfect_ok &= p.mse == 0.0 && p.rmse == 0.0 && p.mae == 0.0 && p.mape == 0.0 && q.value == 0.0;

        let mut predicted = actual.clone();
        let i = rng.random_range(0..n);
        predicted[i] = match rng.random_range(0..3) {
            0 => predicted[i].next_up(),
            1 => predicted[i].next_down(),
            _ => predicted[i] * rng.random_range(0.1..10.0),
        };
        if predicted[i] != actual[i] {
            imperfect_ok &= qlike(&predicted, &actual, QlikeForm::Canonical).unwrap().value > 0.0;
        }
    }

    let (table, _) = econometric_sweep();
    let mut worst = 0.0f64;
    for c in &table.cells {
        worst = worst.max((c.rmse * c.rmse - c.mse).abs() / c.mse);
    }
    report(
        4,
        "loss identities",
        perfect_ok && imperfect_ok && worst <= 1e-12,
        &format!(
            "perfect forecasts give exact zeros: {perfect_ok}; canonical qlike > 0 when imperfect (down to 1 ulp): {imperfect_ok}; worst |rmse^2 - mse|/mse {worst:.2e} (<= 1e-12) over {} cells",
            table.cells.len()
        ),
    );
}

#[test]
fn har_ranks_lowest_at_one_day() {
    let start = Instant::now();
    let data = synthetic_data();
    let spec = RollingSpec::new(DAILY_WINDOW, vec![1]);
    let models: Vec<ModelSpec> = MODEL_NAMES.iter().map(|m| ModelSpec::from_name(m).unwrap()).collect();
    let (table, _) = horizon_sweep(&models, &data, &spec, SYNTHETIC_SEED).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut ranked: Vec<(String, f64)> =
        table.cells.iter().map(|c| (c.model.clone(), c.qlike_canonical)).collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    let har = table.cell("har", 1).unwrap().qlike_canonical;
    let strictly_lowest = table.cells.iter().all(|c| c.model == "har" || c.qlike_canonical > har);
    let order: Vec<String> = ranked.iter().map(|(m, v)| format!("{m} {v:.6e}")).collect();
    report(
        5,
        "har lowest canonical qlike at h=1",
        strictly_lowest && table.cells.len() == 6 && secs < 1800.0,
        &format!("{} records per model, neural refit every 20; ranking {}; {secs:.0} s (< 1800 s)", table.cells[0].records, order.join(" < ")),
    );
}

#[test]
fn garch_worsens_from_one_day_to_three_months() {
    let (table, secs) = econometric_sweep();
    let h1 = table.cell("garch", 1).unwrap().qlike_canonical;
    let h90 = table.cell("garch", 90).unwrap().qlike_canonical;
    report(
        6,
        "garch qlike h=1 below h=90",
        h1 < h90,
        &format!("garch canonical qlike {h1:.6e} at 1d vs {h90:.6e} at 3m (sweep of garch and har over 11 horizons took {:.0} s)", secs.as_secs_f64()),
    );
}

#[test]
fn harness_hygiene() {
    let start = Instant::now();
    let mut configurations = 0u64;
    let mut records = 0u64;
    let mut violations = Vec::new();
    for n in 2..=200usize {
        for window in 1..n {
            for h in 1..=n - window {
                for refit in [1usize, 20] {
                    configurations += 1;
                    let plan = rolling_origins(n, window, h, refit).unwrap();
                    let eligible: Vec<usize> = (0..n).filter(|t| t + 1 >= window && t + h < n).collect();
                    records += plan.len() as u64;
                    let ok = plan.len() == n - window - h + 1
                        && plan.len() == eligible.len()
                        && plan.iter().zip(&eligible).all(|(o, t)| {
                            o.origin == *t
                                && o.target == t + h
                                && o.fit_end + 1 - o.fit_start == window
                                && o.fit_end <= o.origin
                                && o.origin - o.fit_end < refit
                                && !(o.fit_start..=o.fit_end).contains(&o.target)
                        });
                    if !ok && violations.len() < 5 {
                        violations.push((n, window, h, refit));
                    }
                }
            }
        }
    }

    // the forecasting loop itself must follow the plan
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let rv: Vec<f64> = (0..200).map(|_| 1e-4 * rng.random_range(0.5..1.5)).collect();
    let data = BacktestData::new(RvSeries::from_values(rv, Frequency::Daily).unwrap(), None).unwrap();
    let model = ModelSpec::HarFixed(HarParams::new(1e-5, 0.4, 0.3, 0.2));
    let mut forecasts = 0u64;
    for window in 30..200 {
        let spec = RollingSpec::new(window, (1..=200 - window).collect());
        for set in rolling_forecast(&model, &data, &spec, 0).unwrap() {
            let plan = rolling_origins(200, window, set.horizon, 1).unwrap();
            forecasts += set.records.len() as u64;
            let ok = set.records.len() == plan.len()
                && set.records.iter().zip(&plan).all(|(r, o)| r.position == *o && r.actual == data.rv.values()[o.target]);
            if !ok && violations.len() < 5 {
                violations.push((200, window, set.horizon, 1));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        7,
        "harness hygiene",
        violations.is_empty() && secs < 60.0,
        &format!("{configurations} (n <= 200, window, h, refit) plans with {records} records checked against brute-force enumeration, {forecasts} executed forecasts checked against their plans; violations {violations:?}; {secs:.1} s (< 60 s)"),
    );
}

#[test]
fn backtest_is_deterministic() {
    let sample = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample_daily.csv");
    let config = format!(
        r#"{{
            "data": {:?},
            "window_size": 200,
            "models": ["har", "garch", "rgarch", {{"name": "gru", "epochs": 3}}, {{"name": "lstm", "epochs": 3}}, {{"name": "rnn", "epochs": 3}}],
            "horizons": [1, 5],
            "seed": 11
        }}"#,
        sample.canonicalize().unwrap()
    );
    let cfg = RunConfig::from_json(&config, Path::new(".")).unwrap();
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            cmd_backtest(&cfg, dir.path()).unwrap();
            std::fs::read(dir.path().join("losses.csv")).unwrap()
        })
        .collect();
    report(
        8,
        "determinism",
        runs[0] == runs[1] && !runs[0].is_empty(),
        &format!("two cmd_backtest runs (6 models, horizons 1 and 5, seed 11) wrote {} and {} byte losses.csv, identical: {}", runs[0].len(), runs[1].len(), runs[0] == runs[1]),
    );
}

fn oracle_jb(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m = |p: i32| x.iter().map(|v| (v - mean).powi(p)).sum::<f64>() / n;
    let s = m(3) / m(2).powf(1.5);
    let k = m(4) / (m(2) * m(2));
    n / 6.0 * (s * s + (k - 3.0).powi(2) / 4.0)
}

fn oracle_lb(x: &[f64], lags: usize) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let denom: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    let mut q = 0.0;
    for k in 1..=lags {
        let mut c = 0.0;
        for t in k..n {
            c += (x[t] - mean) * (x[t - k] - mean);
        }
        let rho = c / denom;
        q += rho * rho / (n - k) as f64;
    }
    n as f64 * (n as f64 + 2.0) * q
}

fn oracle_arch(x: &[f64], lags: usize) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let e2: Vec<f64> = x.iter().map(|v| (v - mean).powi(2)).collect();
    let k = lags + 1;
    let mut design = Vec::new();
    let mut y = Vec::new();
    for t in lags..n {
        design.push(1.0);
        for l in 1..=lags {
            design.push(e2[t - l]);
        }
        y.push(e2[t]);
    }
    let rows = y.len();
    let (b, _) = normal_equations(&design, rows, k, &y);
    let ybar = y.iter().sum::<f64>() / rows as f64;
    let mut ssr = 0.0;
    let mut sst = 0.0;
    for t in 0..rows {
        let fitted: f64 = (0..k).map(|j| design[t * k + j] * b[j]).sum();
        ssr += (y[t] - fitted).powi(2);
        sst += (y[t] - ybar).powi(2);
    }
    rows as f64 * (1.0 - ssr / sst)
}

fn oracle_adf(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    let k = 2 + lag;
    let mut design = Vec::new();
    let mut y = Vec::new();
    for t in lag + 1..n {
        design.push(1.0);
        design.push(x[t - 1]);
        for i in 1..=lag {
            design.push(x[t - i] - x[t - i - 1]);
        }
        y.push(x[t] - x[t - 1]);
    }
    let rows = y.len();
    let (b, inv) = normal_equations(&design, rows, k, &y);
    let ssr: f64 = (0..rows).map(|t| (y[t] - (0..k).map(|j| design[t * k + j] * b[j]).sum::<f64>()).powi(2)).sum();
    let s2 = ssr / (rows - k) as f64;
    b[1] / (s2 * inv[1][1]).sqrt()
}

#[test]
fn statistics_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = [0.0f64; 4];
    for case in 0..20 {
        let n = rng.random_range(60..=200);
        // alternate stationary GARCH-like noise and random walks
        let mut x = Vec::with_capacity(n);
        let mut level = 0.0;
        let mut var: f64 = 1.0;
        let mut prev: f64 = 0.0;
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            var = 0.2 + 0.3 * prev * prev + 0.5 * var;
            prev = var.sqrt() * z;
            level += prev;
            x.push(if case % 2 == 0 { prev } else { level });
        }
        let lag = schwert_lag(n).min(8);
        let pairs = [
            (jarque_bera(&x).unwrap().statistic, oracle_jb(&x)),
            (ljung_box(&x, 10).unwrap().statistic, oracle_lb(&x, 10)),
            (arch_lm(&x, 5).unwrap().statistic, oracle_arch(&x, 5)),
            (adf(&x, lag).unwrap().statistic, oracle_adf(&x, lag)),
        ];
        for (w, (got, want)) in worst.iter_mut().zip(pairs) {
            *w = w.max(relative_error(got, want));
        }
    }
    report(
        9,
        "statistics oracle",
        worst.iter().all(|w| *w < 1e-8),
        &format!(
            "worst relative error over 20 series (n 60..200): jb {:.2e}, lb {:.2e}, arch-lm {:.2e}, adf {:.2e} (each < 1e-8)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    );
}
