//! Price-history analysis, forecasting, and trading-strategy evaluation.
//!
//! The crate is organised around the stages of a daily-bar trading study:
//!
//! - [`data`] — OHLC bar parsing, validation, splitting, returns and volatility
//! - [`stats`] — stationarity and correlation diagnostics (ACF, PACF, ADF, KDE)
//! - [`arima`] — ARIMA fitting, AIC-driven stepwise order search, forecasting
//! - [`nn`] — feed-forward neural regressors trained with Adam on L1 loss
//! - [`forecast`] — lag-window datasets, walk-forward prediction, error metrics
//! - [`strategy`] — EMA / triple-EMA indicators and entry/exit signal rules
//! - [`backtest`] — trade application, equity curves, and profit/risk metrics
//!
//! Heavier batch computations (per-channel training, order search, grid
//! evaluation) run data-parallel when the `parallel` feature is enabled
//! (the default) and fall back to equivalent sequential loops otherwise.
//! Both paths produce bit-identical results.

pub mod arima;
pub mod backtest;
pub mod data;
pub mod forecast;
pub mod nn;
pub(crate) mod parallel;
pub mod stats;
pub mod strategy;
