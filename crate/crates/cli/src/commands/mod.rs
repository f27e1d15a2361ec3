//! Subcommand implementations and the helpers they share.

pub mod analyze;
pub mod arima;
pub mod backtest;
pub mod forecast;
pub mod ingest;
pub mod pipeline;
pub mod train;

use crate::config::RunConfig;
use anyhow::{Context, Result};
use std::path::{Path, PathBuf};
use tradekit::data::{parse_ohlc_csv, Channel, OhlcSeries};
use tradekit::forecast::ChannelModels;
use tradekit::nn::{load_model, save_model, MlpModel};

/// Flags shared by every subcommand, merged over the config file.
#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Input OHLC CSV file.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory where artifacts are written.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Optional TOML config file (also honoured via TRADEKIT_CONFIG).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Symbol label for the series.
    #[arg(long)]
    pub symbol: Option<String>,
    /// Random seed for model initialisation and shuffling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of trailing bars held out for validation.
    #[arg(long)]
    pub validation_len: Option<usize>,
    /// Lag window length fed to the regressors.
    #[arg(long)]
    pub window: Option<usize>,
    /// Forecast horizon in trading days.
    #[arg(long)]
    pub horizon: Option<usize>,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut config = RunConfig::load(self.config.as_deref())?;
        if let Some(symbol) = &self.symbol {
            config.symbol = symbol.clone();
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(v) = self.validation_len {
            config.validation_len = v;
        }
        if let Some(w) = self.window {
            config.lag_window = w;
        }
        if let Some(h) = self.horizon {
            config.horizon = h;
        }
        config.validate()?;
        Ok(config)
    }
}

pub(crate) fn load_series(path: &Path, symbol: &str) -> Result<OhlcSeries> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("opening input file {}", path.display()))?;
    let series = parse_ohlc_csv(std::io::BufReader::new(file), symbol)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(series)
}

pub(crate) fn model_file_name(channel: Channel) -> String {
    format!("model_{}.mlp", channel.name())
}

pub(crate) fn save_channel_models(dir: &Path, models: &ChannelModels<MlpModel>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for channel in Channel::ALL {
        let path = dir.join(model_file_name(channel));
        std::fs::write(&path, save_model(models.get(channel)))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub(crate) fn load_channel_models(dir: &Path) -> Result<ChannelModels<MlpModel>> {
    let mut load = |channel: Channel| -> Result<MlpModel> {
        let path = dir.join(model_file_name(channel));
        let bytes = std::fs::read(&path)
            .with_context(|| format!("reading model file {}", path.display()))?;
        load_model(&bytes).with_context(|| format!("loading {}", path.display()))
    };
    Ok(ChannelModels {
        open: load(Channel::Open)?,
        high: load(Channel::High)?,
        low: load(Channel::Low)?,
        close: load(Channel::Close)?,
    })
}

/// `entry_date,exit_date` CSV into trade intents.
pub(crate) fn parse_trades_file(path: &Path) -> Result<Vec<tradekit::strategy::TradeIntent>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading trades file {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.to_ascii_lowercase().starts_with("entry_date")) {
            continue;
        }
        let (entry, exit) = line
            .split_once(',')
            .with_context(|| format!("trades file line {}: expected entry_date,exit_date", i + 1))?;
        let parse = |s: &str| {
            chrono::NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d")
                .with_context(|| format!("trades file line {}: bad date `{s}`", i + 1))
        };
        out.push(tradekit::strategy::TradeIntent {
            entry_date: parse(entry)?,
            exit_date: parse(exit.split(',').next().unwrap_or(exit))?,
        });
    }
    anyhow::ensure!(!out.is_empty(), "trades file {} holds no trades", path.display());
    Ok(out)
}
