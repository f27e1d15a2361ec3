//! Lag-window datasets, walk-forward multi-step forecasting, and forecast
//! error metrics.

use crate::data::{Channel, OhlcSeries};
use crate::nn::MlpModel;
use chrono::{Datelike, NaiveDate, Weekday};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForecastError {
    #[error("series of length {len} too short for window {window}")]
    SeriesTooShort { len: usize, window: usize },
    #[error("history supplies {got} bars but the lag window needs {need}")]
    InsufficientHistory { need: usize, got: usize },
    #[error("teacher-forced forecasting needs {need} actual bars, got {got}")]
    MissingActuals { need: usize, got: usize },
    #[error("actual and predicted series lengths differ ({actual} vs {predicted})")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("MAPE undefined: actual value at index {0} is zero")]
    ZeroActual(usize),
    #[error("variance of the actual series is zero")]
    ZeroVariance,
    #[error(transparent)]
    Nn(#[from] crate::nn::NnError),
}

/// One supervised example: a window of consecutive values and the value
/// that follows it.
#[derive(Debug, Clone, PartialEq)]
pub struct LagSample {
    pub window: Vec<f64>,
    pub target: f64,
    pub target_date: NaiveDate,
}

/// Builds the full set of overlapping lag windows for one channel.
/// Sample count is `len - window`; shuffling is left to the trainer.
pub fn make_lag_dataset(
    series: &OhlcSeries,
    channel: Channel,
    window: usize,
) -> Result<Vec<LagSample>, ForecastError> {
    let values = series.channel_values(channel);
    if window == 0 || values.len() <= window {
        return Err(ForecastError::SeriesTooShort {
            len: values.len(),
            window,
        });
    }
    Ok((window..values.len())
        .map(|t| LagSample {
            window: values[t - window..t].to_vec(),
            target: values[t],
            target_date: series.bars[t].date,
        })
        .collect())
}

/// Anything that can turn a raw-scale lag window into the next raw-scale
/// value.
pub trait Predictor {
    fn window_len(&self) -> usize;
    fn predict_next(&self, window: &[f64]) -> f64;
}

impl Predictor for MlpModel {
    fn window_len(&self) -> usize {
        self.config.input_size
    }

    /// Scales the window, runs the network, and inverse-scales the output.
    /// Predictions are floored just above zero to keep prices positive.
    fn predict_next(&self, window: &[f64]) -> f64 {
        let raw = self.predict_raw(window).unwrap_or(f64::MIN_POSITIVE);
        raw.max(1e-6)
    }
}

/// The four per-channel predictors used on OHLC data.
#[derive(Debug, Clone)]
pub struct ChannelModels<P> {
    pub open: P,
    pub high: P,
    pub low: P,
    pub close: P,
}

impl<P> ChannelModels<P> {
    pub fn get(&self, channel: Channel) -> &P {
        match channel {
            Channel::Open => &self.open,
            Channel::High => &self.high,
            Channel::Low => &self.low,
            Channel::Close => &self.close,
        }
    }
}

/// How the input window advances across the forecast horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForecastMode {
    /// Windows are refilled with observed values as they become available.
    TeacherForced,
    /// Windows are refilled with the model's own predictions.
    Recursive,
}

/// Predicted OHLC paths aligned to calendar dates.
#[derive(Debug, Clone)]
pub struct ForecastSet {
    pub dates: Vec<NaiveDate>,
    pub open: Vec<f64>,
    pub high: Vec<f64>,
    pub low: Vec<f64>,
    pub close: Vec<f64>,
}

impl ForecastSet {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn channel(&self, channel: Channel) -> &[f64] {
        match channel {
            Channel::Open => &self.open,
            Channel::High => &self.high,
            Channel::Low => &self.low,
            Channel::Close => &self.close,
        }
    }
}

fn next_weekday(mut date: NaiveDate) -> NaiveDate {
    loop {
        date = date.succ_opt().expect("date overflow");
        if !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            return date;
        }
    }
}

/// Forecasts `horizon` days ahead, one step at a time, for all four
/// channels.
///
/// In teacher-forced mode each day is predicted from the most recent
/// observed values, so `actuals` must supply the horizon; in recursive mode
/// predictions feed back into the window. Dates come from `actuals` when
/// available, otherwise they continue on weekdays after the history.
pub fn walk_forward_forecast<P: Predictor>(
    models: &ChannelModels<P>,
    history: &OhlcSeries,
    actuals: Option<&OhlcSeries>,
    horizon: usize,
    mode: ForecastMode,
) -> Result<ForecastSet, ForecastError> {
    let window = models.close.window_len();
    if history.len() < window {
        return Err(ForecastError::InsufficientHistory {
            need: window,
            got: history.len(),
        });
    }
    if mode == ForecastMode::TeacherForced {
        let got = actuals.map_or(0, |a| a.len());
        if got < horizon {
            return Err(ForecastError::MissingActuals { need: horizon, got });
        }
    }

    let dates: Vec<NaiveDate> = match actuals {
        Some(a) if a.len() >= horizon => a.bars[..horizon].iter().map(|b| b.date).collect(),
        _ => {
            let mut dates = Vec::with_capacity(horizon);
            let mut d = history.last_date().expect("non-empty history");
            for _ in 0..horizon {
                d = next_weekday(d);
                dates.push(d);
            }
            dates
        }
    };

    let mut predicted: Vec<Vec<f64>> = Vec::with_capacity(4);
    for channel in Channel::ALL {
        let model = models.get(channel);
        let mut recent: Vec<f64> = history.channel_values(channel);
        let mut path = Vec::with_capacity(horizon);
        for h in 0..horizon {
            let start = recent.len() - window;
            let pred = model.predict_next(&recent[start..]);
            path.push(pred);
            match mode {
                ForecastMode::TeacherForced => {
                    recent.push(actuals.expect("checked above").bars[h].channel(channel));
                }
                ForecastMode::Recursive => recent.push(pred),
            }
        }
        predicted.push(path);
    }

    let mut it = predicted.into_iter();
    Ok(ForecastSet {
        dates,
        open: it.next().unwrap(),
        high: it.next().unwrap(),
        low: it.next().unwrap(),
        close: it.next().unwrap(),
    })
}

/// The five forecast-quality metrics for one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub mape: f64,
    pub evs: f64,
}

/// MSE, RMSE (= sqrt of the same accumulation), MAE, MAPE, and explained
/// variance. Variances are population variances on both sides of the EVS
/// ratio.
pub fn compute_error_metrics(actual: &[f64], predicted: &[f64]) -> Result<ErrorReport, ForecastError> {
    if actual.len() != predicted.len() || actual.is_empty() {
        return Err(ForecastError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    let n = actual.len() as f64;
    let mut mse = 0.0;
    let mut mae = 0.0;
    let mut mape = 0.0;
    for (i, (&y, &yhat)) in actual.iter().zip(predicted).enumerate() {
        let e = y - yhat;
        mse += e * e;
        mae += e.abs();
        if y == 0.0 {
            return Err(ForecastError::ZeroActual(i));
        }
        mape += (e / y).abs();
    }
    mse /= n;
    mae /= n;
    mape /= n;

    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / n;
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n
    };
    let errors: Vec<f64> = actual.iter().zip(predicted).map(|(y, p)| y - p).collect();
    let var_y = var(actual);
    if var_y == 0.0 {
        return Err(ForecastError::ZeroVariance);
    }
    let evs = 1.0 - var(&errors) / var_y;

    Ok(ErrorReport {
        mse,
        rmse: mse.sqrt(),
        mae,
        mape,
        evs,
    })
}
