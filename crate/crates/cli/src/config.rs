//! Run configuration: built-in defaults, optional TOML file, CLI overrides.
//!
//! A config file may be named with `--config` or the `TRADEKIT_CONFIG`
//! environment variable (the only environment influence on a run); explicit
//! command-line flags always win.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use tradekit::backtest::Sizing;
use tradekit::forecast::ForecastMode;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub symbol: String,
    pub validation_len: usize,
    pub lag_window: usize,
    pub horizon: usize,
    pub tema_period: usize,
    pub budget: f64,
    pub seed: u64,
    pub sizing: SizingChoice,
    pub mode: ModeChoice,
    pub hidden_sizes: Vec<usize>,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub commission_pct: f64,
    pub slippage_pct: f64,
    pub max_p: usize,
    pub max_q: usize,
    pub max_d: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            symbol: "ANF".into(),
            validation_len: 30,
            lag_window: 5,
            horizon: 30,
            tema_period: 3,
            budget: 100.0,
            seed: 42,
            sizing: SizingChoice::OneShare,
            mode: ModeChoice::Teacher,
            hidden_sizes: vec![150, 150],
            dropout_rate: 0.2,
            learning_rate: 1e-3,
            batch_size: 5,
            max_epochs: 500,
            patience: 50,
            commission_pct: 0.0,
            slippage_pct: 0.0,
            max_p: 5,
            max_q: 5,
            max_d: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SizingChoice {
    OneShare,
    Compounded,
}

impl From<SizingChoice> for Sizing {
    fn from(value: SizingChoice) -> Self {
        match value {
            SizingChoice::OneShare => Sizing::OneShare,
            SizingChoice::Compounded => Sizing::Compounded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeChoice {
    Teacher,
    Recursive,
}

impl From<ModeChoice> for ForecastMode {
    fn from(value: ModeChoice) -> Self {
        match value {
            ModeChoice::Teacher => ForecastMode::TeacherForced,
            ModeChoice::Recursive => ForecastMode::Recursive,
        }
    }
}

impl RunConfig {
    /// Defaults, overlaid with the TOML file from `--config` or
    /// `TRADEKIT_CONFIG` when present.
    pub fn load(explicit_path: Option<&Path>) -> Result<Self> {
        let path: Option<PathBuf> = explicit_path
            .map(PathBuf::from)
            .or_else(|| std::env::var_os("TRADEKIT_CONFIG").map(PathBuf::from));
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(&p)
                    .with_context(|| format!("reading config file {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config file {}", p.display()))
            }
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        anyhow::ensure!(self.validation_len >= 1, "validation_len must be at least 1");
        anyhow::ensure!(self.lag_window >= 1, "lag_window must be at least 1");
        anyhow::ensure!(self.horizon >= 1, "horizon must be at least 1");
        anyhow::ensure!(self.tema_period >= 2, "tema_period must be at least 2");
        anyhow::ensure!(self.budget > 0.0, "budget must be positive");
        anyhow::ensure!(self.batch_size >= 1, "batch_size must be at least 1");
        Ok(())
    }

    /// The network configuration for one per-channel model.
    pub fn mlp_config(&self, channel_tag: u64) -> tradekit::nn::MlpConfig {
        tradekit::nn::MlpConfig {
            input_size: self.lag_window,
            hidden_sizes: self.hidden_sizes.clone(),
            dropout_rate: self.dropout_rate,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            patience: self.patience,
            // Channels train independently; give each its own stream.
            seed: self.seed.wrapping_mul(4).wrapping_add(channel_tag),
            ..tradekit::nn::MlpConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let config = RunConfig::default();
        config.validate().unwrap();
        assert_eq!(config.validation_len, 30);
        assert_eq!(config.lag_window, 5);
        assert_eq!(config.hidden_sizes, vec![150, 150]);
    }

    #[test]
    fn toml_round_trip() {
        let config = RunConfig::default();
        let text = toml::to_string(&config).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.budget, config.budget);
        assert_eq!(back.sizing, config.sizing);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let config: RunConfig = toml::from_str("seed = 7\nhorizon = 10\n").unwrap();
        assert_eq!(config.seed, 7);
        assert_eq!(config.horizon, 10);
        assert_eq!(config.validation_len, 30);
    }
}
