//! Descriptive statistics and the diagnostic test battery: Jarque-Bera,
//! Ljung-Box, ARCH-LM and augmented Dickey-Fuller.
//!
//! Kurtosis is always reported as *excess* kurtosis (0 for a normal law).
//! Skewness and kurtosis are bias-uncorrected moment ratios; the standard
//! deviation uses the `n - 1` denominator.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::linalg;

/// ADF critical values (constant, no trend) at 1%, 5% and 10%.
pub const ADF_CRITICAL_VALUES: [(f64, f64); 3] = [(0.01, -3.43), (0.05, -2.86), (0.10, -2.57)];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    pub skewness: f64,
    /// Excess kurtosis.
    pub kurtosis: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub decision_note: String,
}

struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

fn central_moments(x: &[f64]) -> Moments {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    Moments { n, mean, m2: m2 / n, m3: m3 / n, m4: m4 / n }
}

fn chi2_sf(statistic: f64, df: usize) -> f64 {
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    dist.sf(statistic.max(0.0)).clamp(0.0, 1.0)
}

fn check_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::Domain { index, message: "non-finite value".into() }),
        None => Ok(()),
    }
}

/// Sample moments. A zero-variance series reports skewness and kurtosis 0.
pub fn summarize(x: &[f64]) -> Result<SummaryStats> {
    if x.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: x.len() });
    }
    check_finite(x)?;
    let m = central_moments(x);
    let (skewness, kurtosis) = if m.m2 > 0.0 {
        (m.m3 / m.m2.powf(1.5), m.m4 / (m.m2 * m.m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SummaryStats {
        n: x.len(),
        mean: m.mean.clamp(min, max),
        sd: (m.m2 * m.n / (m.n - 1.0)).sqrt(),
        min,
        max,
        skewness,
        kurtosis,
    })
}

/// `JB = n/6 (S² + K²/4)` with `K` the excess kurtosis; chi-square(2) p-value.
pub fn jarque_bera(x: &[f64]) -> Result<TestResult> {
    if x.len() < 8 {
        return Err(Error::InsufficientData { needed: 8, got: x.len() });
    }
    check_finite(x)?;
    let m = central_moments(x);
    if m.m2 <= 0.0 {
        return Err(Error::invalid("Jarque-Bera requires positive variance"));
    }
    let s = m.m3 / m.m2.powf(1.5);
    let k = m.m4 / (m.m2 * m.m2) - 3.0;
    let statistic = m.n / 6.0 * (s * s + k * k / 4.0);
    let p = chi2_sf(statistic, 2);
    Ok(TestResult {
        statistic,
        p_value: Some(p),
        decision_note: if p < 0.05 { "reject normality at 5%".into() } else { "normality not rejected at 5%".into() },
    })
}

/// Sample autocorrelations for lags `1..=max_lag` with the biased (1/n) denominator.
pub fn autocorrelations(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if n <= max_lag {
        return Err(Error::InsufficientData { needed: max_lag + 1, got: n });
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = d.iter().map(|v| v * v).sum();
    if c0 <= 0.0 {
        return Err(Error::invalid("autocorrelation of a constant series is undefined"));
    }
    Ok((1..=max_lag)
        .map(|k| d[k..].iter().zip(&d[..n - k]).map(|(a, b)| a * b).sum::<f64>() / c0)
        .collect())
}

/// `Q = n(n+2) Σ ρ_k²/(n-k)` over `lags` lags; chi-square(lags) p-value.
pub fn ljung_box(x: &[f64], lags: usize) -> Result<TestResult> {
    if lags == 0 {
        return Err(Error::invalid("Ljung-Box needs at least one lag"));
    }
    let n = x.len();
    if n <= lags + 1 {
        return Err(Error::InsufficientData { needed: lags + 2, got: n });
    }
    check_finite(x)?;
    let rho = autocorrelations(x, lags)?;
    let nf = n as f64;
    let q = nf * (nf + 2.0) * rho.iter().enumerate().map(|(i, r)| r * r / (nf - (i + 1) as f64)).sum::<f64>();
    let p = chi2_sf(q, lags);
    Ok(TestResult {
        statistic: q,
        p_value: Some(p),
        decision_note: if p < 0.05 {
            format!("serial correlation up to lag {lags} (5%)")
        } else {
            format!("no serial correlation up to lag {lags} detected (5%)")
        },
    })
}

/// Engle's LM test: regress squared demeaned values on `lags` own lags and an
/// intercept; statistic `(n - lags) R²`.
pub fn arch_lm(x: &[f64], lags: usize) -> Result<TestResult> {
    if lags == 0 {
        return Err(Error::invalid("ARCH-LM needs at least one lag"));
    }
    let n = x.len();
    if n <= 2 * lags + 1 {
        return Err(Error::InsufficientData { needed: 2 * lags + 2, got: n });
    }
    check_finite(x)?;
    let mean = x.iter().sum::<f64>() / n as f64;
    let e2: Vec<f64> = x.iter().map(|v| (v - mean) * (v - mean)).collect();
    let rows = n - lags;
    let k = lags + 1;
    let mut design = Vec::with_capacity(rows * k);
    let mut y = Vec::with_capacity(rows);
    for t in lags..n {
        design.push(1.0);
        for l in 1..=lags {
            design.push(e2[t - l]);
        }
        y.push(e2[t]);
    }
    let fit = linalg::ols(&design, rows, k, &y)?;
    let statistic = rows as f64 * fit.r_squared(&y);
    let p = chi2_sf(statistic, lags);
    Ok(TestResult {
        statistic,
        p_value: Some(p),
        decision_note: if p < 0.05 { "ARCH effect present (5%)".into() } else { "no ARCH effect detected (5%)".into() },
    })
}

/// ADF regression `Δy_t = a + b y_{t-1} + Σ c_i Δy_{t-i}`; the statistic is
/// the t-ratio of `b`, compared against [`ADF_CRITICAL_VALUES`].
pub fn adf(x: &[f64], max_lag: usize) -> Result<TestResult> {
    let n = x.len();
    if n <= max_lag + 10 {
        return Err(Error::InsufficientData { needed: max_lag + 11, got: n });
    }
    check_finite(x)?;
    let dy: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    // dy[t-1] = y_t - y_{t-1}; rows t = max_lag+1 .. n-1
    let k = 2 + max_lag;
    let mut design = Vec::new();
    let mut y = Vec::new();
    for t in (max_lag + 1)..n {
        design.push(1.0);
        design.push(x[t - 1]);
        for i in 1..=max_lag {
            design.push(dy[t - 1 - i]);
        }
        y.push(dy[t - 1]);
    }
    let rows = y.len();
    let fit = linalg::ols(&design, rows, k, &y)?;
    let statistic = fit.coefficients[1] / fit.std_error(1);
    let decision_note = match ADF_CRITICAL_VALUES.iter().find(|(_, cv)| statistic < *cv) {
        Some((level, cv)) => format!("reject unit root at {}% (stat {statistic:.4} < {cv})", level * 100.0),
        None => format!("fail to reject unit root (stat {statistic:.4} > {})", ADF_CRITICAL_VALUES[2].1),
    };
    Ok(TestResult { statistic, p_value: None, decision_note })
}

/// Schwert's rule of thumb for the ADF lag order: `floor(12 (n/100)^{1/4})`.
pub fn schwert_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// One row of the descriptive table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SummaryRow {
    pub series: String,
    pub stats: SummaryStats,
    pub jarque_bera: TestResult,
    pub ljung_box: TestResult,
    pub adf: TestResult,
    pub arch_lm: TestResult,
}

pub const SUMMARY_HEADER: &str = "series,obs,mean,sd,min,max,skew,kurt,jb_pvalue,lb_pvalue,adf_stat,arch_lm_pvalue";

impl SummaryRow {
    pub fn compute(series: &str, x: &[f64], lb_lags: usize, arch_lags: usize, adf_lag: usize) -> Result<Self> {
        Ok(Self {
            series: series.to_string(),
            stats: summarize(x)?,
            jarque_bera: jarque_bera(x)?,
            ljung_box: ljung_box(x, lb_lags)?,
            adf: adf(x, adf_lag)?,
            arch_lm: arch_lm(x, arch_lags)?,
        })
    }

    pub fn csv_row(&self) -> String {
        let s = &self.stats;
        format!(
            "{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.series,
            s.n,
            s.mean,
            s.sd,
            s.min,
            s.max,
            s.skewness,
            s.kurtosis,
            self.jarque_bera.p_value.unwrap_or(f64::NAN),
            self.ljung_box.p_value.unwrap_or(f64::NAN),
            self.adf.statistic,
            self.arch_lm.p_value.unwrap_or(f64::NAN),
        )
    }
}
