//! Price ingestion, log returns, realized variance construction and
//! train/test splitting.
//!
//! Input CSV files carry a `timestamp,price` header with ISO-8601
//! timestamps. Timestamps are taken as given: no timezone conversion is
//! applied and an explicit offset is dropped after parsing. Duplicate
//! timestamps are rejected.

use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, TimeDelta};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampling frequency of a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    Minute,
    Hourly,
    Daily,
}

impl Frequency {
    pub fn seconds(self) -> i64 {
        match self {
            Frequency::Minute => 60,
            Frequency::Hourly => 3_600,
            Frequency::Daily => 86_400,
        }
    }

    pub fn step(self) -> TimeDelta {
        TimeDelta::seconds(self.seconds())
    }

    pub fn name(self) -> &'static str {
        match self {
            Frequency::Minute => "minute",
            Frequency::Hourly => "hourly",
            Frequency::Daily => "daily",
        }
    }
}

impl std::str::FromStr for Frequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minute" => Ok(Frequency::Minute),
            "hourly" => Ok(Frequency::Hourly),
            "daily" => Ok(Frequency::Daily),
            other => Err(Error::invalid(format!(
                "unknown frequency '{other}' (expected minute, hourly or daily)"
            ))),
        }
    }
}

/// Anything that can be cut into contiguous pieces by index.
pub trait Series: Sized {
    fn len(&self) -> usize;
    fn slice(&self, range: Range<usize>) -> Self;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_increasing(timestamps: &[NaiveDateTime]) -> Result<()> {
    for (i, w) in timestamps.windows(2).enumerate() {
        if w[1] == w[0] {
            return Err(Error::Domain {
                index: i + 1,
                message: format!("duplicate timestamp {}", format_timestamp(&w[1])),
            });
        }
        if w[1] < w[0] {
            return Err(Error::Domain {
                index: i + 1,
                message: format!("timestamp {} is not after its predecessor", format_timestamp(&w[1])),
            });
        }
    }
    Ok(())
}

/// Reads a `timestamp,<value>` CSV with strictly increasing timestamps.
fn read_two_columns<R: Read>(
    reader: R,
    value: &str,
    admissible: impl Fn(f64) -> bool,
    requirement: &str,
) -> Result<(Vec<NaiveDateTime>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
    if headers.len() != 2 || &headers[0] != "timestamp" || &headers[1] != value {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header 'timestamp,{value}', got '{}'",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let ts = parse_timestamp(&record[0]).ok_or_else(|| Error::Parse {
            line,
            message: format!("invalid timestamp '{}'", &record[0]),
        })?;
        let v: f64 = record[1].parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid {value} '{}'", &record[1]),
        })?;
        if !(v.is_finite() && admissible(v)) {
            return Err(Error::Parse { line, message: format!("{value} must be {requirement}, got {v}") });
        }
        if let Some(prev) = timestamps.last() {
            if ts <= *prev {
                let what = if ts == *prev { "duplicate" } else { "out-of-order" };
                return Err(Error::Parse { line, message: format!("{what} timestamp '{}'", &record[0]) });
            }
        }
        timestamps.push(ts);
        values.push(v);
    }
    Ok((timestamps, values))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PriceSeries {
    timestamps: Vec<NaiveDateTime>,
    prices: Vec<f64>,
    frequency: Frequency,
}

impl PriceSeries {
    pub fn new(timestamps: Vec<NaiveDateTime>, prices: Vec<f64>, frequency: Frequency) -> Result<Self> {
        if timestamps.len() != prices.len() {
            return Err(Error::Shape(format!(
                "{} timestamps but {} prices",
                timestamps.len(),
                prices.len()
            )));
        }
        if prices.len() < 2 {
            return Err(Error::InsufficientData { needed: 2, got: prices.len() });
        }
        if let Some(index) = prices.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::Domain {
                index,
                message: format!("price must be positive, got {}", prices[index]),
            });
        }
        check_increasing(&timestamps)?;
        Ok(Self { timestamps, prices, frequency })
    }

    /// Reads a `timestamp,price` CSV. Parse errors carry the 1-based file
    /// line number.
    pub fn from_csv_reader<R: Read>(reader: R, frequency: Frequency) -> Result<Self> {
        let (timestamps, prices) = read_two_columns(reader, "price", |p| p > 0.0, "positive")?;
        Self::new(timestamps, prices, frequency)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, frequency: Frequency) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file), frequency)
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReturnSeries {
    timestamps: Vec<NaiveDateTime>,
    returns: Vec<f64>,
    frequency: Frequency,
}

impl ReturnSeries {
    pub fn new(timestamps: Vec<NaiveDateTime>, returns: Vec<f64>, frequency: Frequency) -> Result<Self> {
        if timestamps.len() != returns.len() {
            return Err(Error::Shape(format!(
                "{} timestamps but {} returns",
                timestamps.len(),
                returns.len()
            )));
        }
        check_increasing(&timestamps)?;
        Ok(Self { timestamps, returns, frequency })
    }

    /// Returns stamped on a regular grid; used by simulators.
    pub fn from_values(returns: Vec<f64>, frequency: Frequency) -> Self {
        let timestamps = regular_timestamps(returns.len(), frequency);
        Self { timestamps, returns, frequency }
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }
}

impl Series for ReturnSeries {
    fn len(&self) -> usize {
        self.returns.len()
    }

    fn slice(&self, range: Range<usize>) -> Self {
        Self {
            timestamps: self.timestamps[range.clone()].to_vec(),
            returns: self.returns[range].to_vec(),
            frequency: self.frequency,
        }
    }
}

/// Realized variance per bucket. `samples_per_bucket` is the nominal number
/// of native observations in one bucket (1 when RV is the squared return).
#[derive(Clone, Debug, PartialEq)]
pub struct RvSeries {
    timestamps: Vec<NaiveDateTime>,
    values: Vec<f64>,
    frequency: Frequency,
    samples_per_bucket: usize,
}

impl RvSeries {
    pub fn new(
        timestamps: Vec<NaiveDateTime>,
        values: Vec<f64>,
        frequency: Frequency,
        samples_per_bucket: usize,
    ) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} timestamps but {} values",
                timestamps.len(),
                values.len()
            )));
        }
        if samples_per_bucket == 0 {
            return Err(Error::invalid("samples_per_bucket must be positive"));
        }
        if let Some(index) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain {
                index,
                message: format!("realized variance must be non-negative, got {}", values[index]),
            });
        }
        check_increasing(&timestamps)?;
        Ok(Self { timestamps, values, frequency, samples_per_bucket })
    }

    /// RV values on a regular grid starting 2000-01-01; used for synthetic data.
    pub fn from_values(values: Vec<f64>, frequency: Frequency) -> Result<Self> {
        let timestamps = regular_timestamps(values.len(), frequency);
        Self::new(timestamps, values, frequency, 1)
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn samples_per_bucket(&self) -> usize {
        self.samples_per_bucket
    }

    /// Reads a `timestamp,rv` CSV (the format written by [`RvSeries::write_csv`]).
    pub fn from_csv_reader<R: Read>(reader: R, frequency: Frequency) -> Result<Self> {
        let (timestamps, values) = read_two_columns(reader, "rv", |v| v >= 0.0, "non-negative")?;
        Self::new(timestamps, values, frequency, 1)
    }

    pub fn from_csv_path(path: impl AsRef<Path>, frequency: Frequency) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(std::io::BufReader::new(file), frequency)
    }

    /// Writes `timestamp,rv` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "timestamp,rv")?;
        for (ts, v) in self.timestamps.iter().zip(&self.values) {
            writeln!(w, "{},{:.16e}", format_timestamp(ts), v)?;
        }
        Ok(())
    }
}

impl Series for RvSeries {
    fn len(&self) -> usize {
        self.values.len()
    }

    fn slice(&self, range: Range<usize>) -> Self {
        Self {
            timestamps: self.timestamps[range.clone()].to_vec(),
            values: self.values[range].to_vec(),
            frequency: self.frequency,
            samples_per_bucket: self.samples_per_bucket,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split<S> {
    pub train_fraction: f64,
    pub train: S,
    pub test: S,
}

pub fn log_returns(prices: &PriceSeries) -> ReturnSeries {
    // PriceSeries construction already guarantees positive prices and n >= 2.
    let returns = prices.prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    ReturnSeries {
        timestamps: prices.timestamps[1..].to_vec(),
        returns,
        frequency: prices.frequency,
    }
}

/// Log returns from raw prices, reporting the first non-positive price.
pub fn log_returns_from_slice(prices: &[f64]) -> Result<Vec<f64>> {
    if prices.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: prices.len() });
    }
    if let Some(index) = prices.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(Error::Domain { index, message: format!("price must be positive, got {}", prices[index]) });
    }
    Ok(prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

/// Daily RV with one sample per bucket: the squared return.
pub fn rv_from_squared_returns(returns: &ReturnSeries) -> RvSeries {
    RvSeries {
        timestamps: returns.timestamps.clone(),
        values: returns.returns.iter().map(|r| r * r).collect(),
        frequency: returns.frequency,
        samples_per_bucket: 1,
    }
}

fn aggregate(
    returns: &ReturnSeries,
    bucket: Frequency,
    term: fn(f64) -> f64,
) -> Result<(Vec<NaiveDateTime>, Vec<f64>, usize)> {
    let native = returns.frequency.seconds();
    let width = bucket.seconds();
    if native > width {
        return Err(Error::invalid(format!(
            "bucket '{}' is finer than the {} return frequency",
            bucket.name(),
            returns.frequency.name()
        )));
    }
    if returns.returns.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let first = returns.timestamps[0].and_utc().timestamp();
    let last = returns.timestamps[returns.timestamps.len() - 1].and_utc().timestamp();
    let span = last - first + native;
    if width > span {
        return Err(Error::invalid(format!(
            "bucket of {width}s is coarser than the whole series ({span}s)"
        )));
    }

    let mut timestamps = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut current: Option<i64> = None;
    for (ts, r) in returns.timestamps.iter().zip(&returns.returns) {
        let secs = ts.and_utc().timestamp();
        let close = secs.div_euclid(width) * width + if secs.rem_euclid(width) == 0 { 0 } else { width };
        if current == Some(close) {
            *values.last_mut().expect("open bucket") += term(*r);
        } else {
            current = Some(close);
            timestamps.push(DateTime::from_timestamp(close, 0).expect("bucket close in range").naive_utc());
            values.push(term(*r));
        }
    }
    let samples_per_bucket = (width / native).max(1) as usize;
    Ok((timestamps, values, samples_per_bucket))
}

/// Sums squared returns into clock-aligned buckets.
///
/// A return stamped `t` covers `(t - step, t]` and lands in the bucket whose
/// close is the first multiple of the bucket length at or after `t`. Buckets
/// with no observed return are omitted, never zero-filled.
pub fn rv_aggregate(returns: &ReturnSeries, bucket: Frequency) -> Result<RvSeries> {
    let (timestamps, values, samples_per_bucket) = aggregate(returns, bucket, |r| r * r)?;
    Ok(RvSeries { timestamps, values, frequency: bucket, samples_per_bucket })
}

/// Log returns over the same buckets as [`rv_aggregate`] (sums of the native
/// returns), aligned one-to-one with its output.
pub fn bucket_returns(returns: &ReturnSeries, bucket: Frequency) -> Result<ReturnSeries> {
    let (timestamps, values, _) = aggregate(returns, bucket, |r| r)?;
    Ok(ReturnSeries { timestamps, returns: values, frequency: bucket })
}

/// Splits into a leading train segment of `floor(fraction * n)` observations
/// and the remaining test segment.
pub fn split<S: Series>(series: &S, train_fraction: f64) -> Result<Split<S>> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!("train fraction must lie in (0, 1), got {train_fraction}")));
    }
    let n = series.len();
    let n_train = (train_fraction * n as f64).floor() as usize;
    if n_train < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n_train });
    }
    Ok(Split {
        train_fraction,
        train: series.slice(0..n_train),
        test: series.slice(n_train..n),
    })
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    const FORMATS: [&str; 4] = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"];
    for fmt in FORMATS {
        if let Ok(ts) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(ts);
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return d.and_hms_opt(0, 0, 0);
    }
    DateTime::parse_from_rfc3339(s).ok().map(|dt| dt.naive_local())
}

pub fn format_timestamp(ts: &NaiveDateTime) -> String {
    ts.format("%Y-%m-%dT%H:%M:%S").to_string()
}

/// `n` evenly spaced timestamps starting at 2000-01-01T00:00:00.
pub fn regular_timestamps(n: usize, frequency: Frequency) -> Vec<NaiveDateTime> {
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    (0..n).map(|i| start + TimeDelta::seconds(frequency.seconds() * i as i64)).collect()
}
