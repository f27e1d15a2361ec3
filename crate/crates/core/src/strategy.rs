//! Exponential moving averages, the triple EMA, and the entry/exit rules
//! that turn forecast OHLC paths into a signal stream.

use crate::data::{Channel, OhlcSeries};
use crate::forecast::ForecastSet;
use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("cannot compute an indicator over an empty series")]
    EmptySeries,
    #[error("indicator period must be at least 1")]
    InvalidPeriod,
    #[error("forecast supplies {got} bars but the indicator warm-up needs {need}")]
    InsufficientBars { need: usize, got: usize },
}

/// An indicator aligned to its input: warm-up bars are flagged via
/// `warmup_len`, never omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSeries {
    pub period: usize,
    pub values: Vec<f64>,
    pub warmup_len: usize,
}

/// EMA seeded with the first value, smoothing factor `2 / (period + 1)`.
pub fn ema(values: &[f64], period: usize) -> Result<IndicatorSeries, StrategyError> {
    if values.is_empty() {
        return Err(StrategyError::EmptySeries);
    }
    if period < 1 {
        return Err(StrategyError::InvalidPeriod);
    }
    let alpha = 2.0 / (period as f64 + 1.0);
    let mut out = Vec::with_capacity(values.len());
    let mut prev = values[0];
    for &v in values {
        prev += alpha * (v - prev);
        out.push(prev);
    }
    Ok(IndicatorSeries {
        period,
        values: out,
        warmup_len: period - 1,
    })
}

/// Triple EMA: `3*E1 - 3*E2 + E3` with `E2 = ema(E1)`, `E3 = ema(E2)`.
/// The reduced-lag construction needs three warm-ups, `3 * (period - 1)`.
pub fn tema(values: &[f64], period: usize) -> Result<IndicatorSeries, StrategyError> {
    let e1 = ema(values, period)?;
    let e2 = ema(&e1.values, period)?;
    let e3 = ema(&e2.values, period)?;
    let out = e1
        .values
        .iter()
        .zip(&e2.values)
        .zip(&e3.values)
        .map(|((a, b), c)| 3.0 * a - 3.0 * b + c)
        .collect();
    Ok(IndicatorSeries {
        period,
        values: out,
        warmup_len: 3 * (period - 1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Enter,
    Exit,
    None,
}

impl SignalKind {
    pub fn name(self) -> &'static str {
        match self {
            SignalKind::Enter => "enter",
            SignalKind::Exit => "exit",
            SignalKind::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signal {
    pub date: NaiveDate,
    pub kind: SignalKind,
}

/// Rule parameters; the shipped default uses a 3-period triple EMA.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyRuleSet {
    pub tema_period: usize,
}

impl Default for StrategyRuleSet {
    fn default() -> Self {
        Self { tema_period: 3 }
    }
}

/// The entry condition on the four price-vs-indicator comparisons:
/// `(low_below or high_below) and (close_below or open_below)`.
///
/// The grouping binds the L/H pair and the C/O pair each with `or`, then
/// joins them with `and`. The exit condition is the same expression over
/// the mirrored (above) comparisons.
pub fn entry_rule(low_below: bool, high_below: bool, close_below: bool, open_below: bool) -> bool {
    (low_below || high_below) && (close_below || open_below)
}

/// Per-date signals from predicted OHLC versus each channel's triple EMA.
///
/// When `history` is given, its trailing bars seed the indicator so the
/// early forecast bars are not warm-up dominated; signals are still only
/// emitted for forecast dates past the warm-up. Equality with the
/// indicator produces no signal, and a date satisfying both rules at once
/// resolves to none.
pub fn evaluate_rules(
    forecast: &ForecastSet,
    history: Option<&OhlcSeries>,
    rules: &StrategyRuleSet,
) -> Result<Vec<Signal>, StrategyError> {
    let prefix = history.map_or(0, |h| h.len());
    let warmup = 3 * (rules.tema_period - 1);
    let total = prefix + forecast.len();
    if total == 0 || prefix + forecast.len() <= warmup {
        return Err(StrategyError::InsufficientBars {
            need: warmup + 1,
            got: total,
        });
    }

    let mut indicators = Vec::with_capacity(4);
    for channel in Channel::ALL {
        let mut combined: Vec<f64> = history
            .map(|h| h.channel_values(channel))
            .unwrap_or_default();
        combined.extend_from_slice(forecast.channel(channel));
        indicators.push(tema(&combined, rules.tema_period)?);
    }

    let mut signals = Vec::with_capacity(forecast.len());
    for (i, &date) in forecast.dates.iter().enumerate() {
        let pos = prefix + i;
        if pos < warmup {
            continue;
        }
        let below = |ci: usize| forecast.channel(Channel::ALL[ci])[i] < indicators[ci].values[pos];
        let above = |ci: usize| forecast.channel(Channel::ALL[ci])[i] > indicators[ci].values[pos];
        // Channel order in ALL: open, high, low, close.
        let enter = entry_rule(below(2), below(1), below(3), below(0));
        let exit = entry_rule(above(2), above(1), above(3), above(0));
        let kind = match (enter, exit) {
            (true, false) => SignalKind::Enter,
            (false, true) => SignalKind::Exit,
            _ => SignalKind::None,
        };
        signals.push(Signal { date, kind });
    }
    Ok(signals)
}

/// A matched entry/exit pair of dates, ready to be priced by a backtest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TradeIntent {
    pub entry_date: NaiveDate,
    pub exit_date: NaiveDate,
}

/// Runs the long-only position state machine over a date-ordered signal
/// stream. Repeated entries while long are ignored; exits while flat are
/// ignored; an unmatched final entry closes on the last signal date (and
/// is dropped when that entry is the last date itself).
pub fn signals_to_trades(signals: &[Signal]) -> Vec<TradeIntent> {
    let mut trades = Vec::new();
    let mut open_entry: Option<NaiveDate> = None;
    for signal in signals {
        match (signal.kind, open_entry) {
            (SignalKind::Enter, None) => open_entry = Some(signal.date),
            (SignalKind::Exit, Some(entry)) => {
                trades.push(TradeIntent {
                    entry_date: entry,
                    exit_date: signal.date,
                });
                open_entry = None;
            }
            _ => {}
        }
    }
    if let (Some(entry), Some(last)) = (open_entry, signals.last().map(|s| s.date)) {
        if entry < last {
            trades.push(TradeIntent {
                entry_date: entry,
                exit_date: last,
            });
        }
    }
    trades
}
