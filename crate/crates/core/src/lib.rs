//! Realized-volatility forecasting toolkit.
//!
//! Builds realized variance series from prices, fits GARCH(1,1), realized
//! GARCH and HAR models, trains recurrent networks (RNN, LSTM, GRU) with
//! hand-written backpropagation through time, and compares all of them in a
//! rolling-window backtest over several loss functions.

pub mod backtest;
pub mod cli;
pub mod econometric;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod neural;
pub mod stats;

pub use error::{Error, Result};
