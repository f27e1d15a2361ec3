//! Command-line surface tying the analysis, forecasting, and backtesting
//! stages together. Each stage is independently invocable; `pipeline` runs
//! them end to end.

pub mod chart;
pub mod commands;
pub mod config;
pub mod output;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "tradekit",
    version,
    about = "OHLC forecasting and trading-strategy backtesting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate an OHLC CSV file, reporting a summary.
    Ingest(commands::ingest::IngestArgs),
    /// Stationarity and correlation diagnostics on the close channel.
    Analyze(commands::analyze::AnalyzeArgs),
    /// Stepwise ARIMA baseline: order search, forecast, error metrics.
    Arima(commands::arima::ArimaArgs),
    /// Train the four per-channel regressors and save the models.
    Train(commands::train::TrainArgs),
    /// Walk-forward OHLC forecast from saved models.
    Forecast(commands::forecast::ForecastArgs),
    /// Map trades onto actual prices and score them.
    Backtest(commands::backtest::BacktestArgs),
    /// Full run: split, train or load models, forecast, signal, backtest.
    Pipeline(commands::pipeline::PipelineArgs),
}

/// Runs a parsed invocation. Any error bubbles to a nonzero exit code.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(args) => commands::ingest::run(args),
        Command::Analyze(args) => commands::analyze::run(args),
        Command::Arima(args) => commands::arima::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Forecast(args) => commands::forecast::run(args),
        Command::Backtest(args) => commands::backtest::run(args),
        Command::Pipeline(args) => commands::pipeline::run(args),
    }
}
