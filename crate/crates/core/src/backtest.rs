//! Maps trade intents onto actual prices, builds the equity curve, and
//! scores the run with profit and risk metrics.

use crate::data::OhlcSeries;
use crate::strategy::TradeIntent;
use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("date {0} not present in the price series")]
    UnknownDate(NaiveDate),
    #[error("budget must be positive, got {0}")]
    NegativeBudget(f64),
    #[error("equity curve needs at least {need} points, got {got}")]
    CurveTooShort { need: usize, got: usize },
    #[error("no trades to evaluate")]
    NoTrades,
    #[error("series too short: {0} bars")]
    SeriesTooShort(usize),
}

/// Position sizing for [`apply_trades`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sizing {
    /// Hold exactly one share per trade; profits match per-share arithmetic.
    OneShare,
    /// Reinvest the whole running equity in every trade.
    Compounded,
}

/// One executed round trip. `entry_price`/`exit_price` are fill prices
/// (slippage included); commissions affect equity but not `profit`.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeRecord {
    pub entry_date: NaiveDate,
    pub exit_date: NaiveDate,
    pub entry_price: f64,
    pub exit_price: f64,
    pub quantity: f64,
    pub profit: f64,
    /// Simple percent return on the entry fill.
    pub return_pct: f64,
}

/// Daily marked-to-market account value, starting at the budget.
#[derive(Debug, Clone, PartialEq)]
pub struct EquityCurve {
    pub dates: Vec<NaiveDate>,
    pub equity: Vec<f64>,
}

/// A ratio that may be undefined (zero denominator) rather than infinite.
#[derive(Debug, Clone, PartialEq)]
pub enum RatioValue {
    Defined(f64),
    Undefined { reason: String },
}

impl RatioValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            RatioValue::Defined(v) => Some(*v),
            RatioValue::Undefined { .. } => None,
        }
    }
}

impl std::fmt::Display for RatioValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RatioValue::Defined(v) => write!(f, "{v}"),
            RatioValue::Undefined { reason } => write!(f, "undefined ({reason})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskRatios {
    pub sharpe: RatioValue,
    pub sortino: RatioValue,
    pub calmar: RatioValue,
}

/// Everything a run reports: the trades, the curve, and the metric suite.
#[derive(Debug, Clone)]
pub struct BacktestReport {
    pub trades: Vec<TradeRecord>,
    pub equity: EquityCurve,
    pub total_return_pct: f64,
    pub win_rate: f64,
    pub expectancy: f64,
    pub sharpe: RatioValue,
    pub sortino: RatioValue,
    pub calmar: RatioValue,
    pub max_drawdown: f64,
    pub best_trade_pct: f64,
    pub worst_trade_pct: f64,
    pub avg_trade_pct: f64,
    pub buy_hold_return_pct: f64,
}

/// Fills every intent at the close of its signal dates and marks equity to
/// market daily at the close.
///
/// Buys pay `close * (1 + slippage)`, sells receive `close * (1 - slippage)`,
/// and commission (as a fraction of traded notional) is deducted from equity
/// per side.
pub fn apply_trades(
    series: &OhlcSeries,
    intents: &[TradeIntent],
    budget: f64,
    sizing: Sizing,
    commission_pct: f64,
    slippage_pct: f64,
) -> Result<BacktestReport, BacktestError> {
    if budget <= 0.0 {
        return Err(BacktestError::NegativeBudget(budget));
    }
    if series.len() < 2 {
        return Err(BacktestError::SeriesTooShort(series.len()));
    }
    for intent in intents {
        for date in [intent.entry_date, intent.exit_date] {
            if series.position(date).is_none() {
                return Err(BacktestError::UnknownDate(date));
            }
        }
    }

    struct OpenPosition {
        entry_date: NaiveDate,
        entry_fill: f64,
        quantity: f64,
    }

    let mut entry_on: std::collections::BTreeSet<NaiveDate> = Default::default();
    let mut exit_on: std::collections::BTreeSet<NaiveDate> = Default::default();
    for intent in intents {
        entry_on.insert(intent.entry_date);
        exit_on.insert(intent.exit_date);
    }

    let mut cash = budget;
    let mut open: Option<OpenPosition> = None;
    let mut trades: Vec<TradeRecord> = Vec::new();
    let mut dates = Vec::with_capacity(series.len());
    let mut equity = Vec::with_capacity(series.len());

    for bar in &series.bars {
        if open.is_none() && entry_on.contains(&bar.date) {
            let fill = bar.close * (1.0 + slippage_pct);
            let quantity = match sizing {
                Sizing::OneShare => 1.0,
                Sizing::Compounded => cash / (fill * (1.0 + commission_pct)),
            };
            cash -= fill * quantity * commission_pct;
            open = Some(OpenPosition {
                entry_date: bar.date,
                entry_fill: fill,
                quantity,
            });
        }
        if let Some(position) = &open {
            if exit_on.contains(&bar.date) && bar.date > position.entry_date {
                let fill = bar.close * (1.0 - slippage_pct);
                let profit = (fill - position.entry_fill) * position.quantity;
                cash += profit - fill * position.quantity * commission_pct;
                trades.push(TradeRecord {
                    entry_date: position.entry_date,
                    exit_date: bar.date,
                    entry_price: position.entry_fill,
                    exit_price: fill,
                    quantity: position.quantity,
                    profit,
                    return_pct: (fill - position.entry_fill) / position.entry_fill * 100.0,
                });
                open = None;
            }
        }
        let marked = match &open {
            Some(p) => cash + (bar.close - p.entry_fill) * p.quantity,
            None => cash,
        };
        dates.push(bar.date);
        equity.push(marked);
    }
    // Force a close on the final bar if an intent was left open.
    if let Some(position) = open.take() {
        let bar = series.bars.last().unwrap();
        let fill = bar.close * (1.0 - slippage_pct);
        let profit = (fill - position.entry_fill) * position.quantity;
        cash += profit - fill * position.quantity * commission_pct;
        trades.push(TradeRecord {
            entry_date: position.entry_date,
            exit_date: bar.date,
            entry_price: position.entry_fill,
            exit_price: fill,
            quantity: position.quantity,
            profit,
            return_pct: (fill - position.entry_fill) / position.entry_fill * 100.0,
        });
        *equity.last_mut().unwrap() = cash;
    }

    let curve = EquityCurve { dates, equity };
    let final_equity = *curve.equity.last().unwrap();
    let total_return_pct = (final_equity - budget) / budget * 100.0;
    let mdd = max_drawdown(&curve);
    let ratios = risk_ratios(&curve, 252)?;
    let buy_hold = buy_and_hold(series)?;

    let (expectancy, win_rate) = match expectancy_ratio(&trades) {
        Ok((er, wr, _, _)) => (er, wr),
        Err(_) => (0.0, 0.0),
    };
    let returns: Vec<f64> = trades.iter().map(|t| t.return_pct).collect();
    let best = returns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let worst = returns.iter().cloned().fold(f64::INFINITY, f64::min);
    let avg = if returns.is_empty() {
        0.0
    } else {
        returns.iter().sum::<f64>() / returns.len() as f64
    };

    Ok(BacktestReport {
        trades,
        equity: curve,
        total_return_pct,
        win_rate,
        expectancy,
        sharpe: ratios.sharpe,
        sortino: ratios.sortino,
        calmar: ratios.calmar,
        max_drawdown: mdd,
        best_trade_pct: if returns.is_empty() { 0.0 } else { best },
        worst_trade_pct: if returns.is_empty() { 0.0 } else { worst },
        avg_trade_pct: avg,
        buy_hold_return_pct: buy_hold,
    })
}

/// Largest relative decline from a running peak, in `[0, 1]`.
pub fn max_drawdown(curve: &EquityCurve) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut worst = 0.0f64;
    for &v in &curve.equity {
        peak = peak.max(v);
        if peak > 0.0 {
            worst = worst.max((peak - v) / peak);
        }
    }
    worst
}

/// Sharpe, Sortino, and Calmar from the curve's daily returns.
///
/// Sharpe: mean/std of daily returns, annualised by sqrt(periods).
/// Sortino: mean over the downside deviation (root mean square of the
/// negative returns), annualised the same way. Calmar: annualised mean
/// return (mean * periods) over the maximum drawdown. Zero denominators
/// yield a signalled undefined value, never an infinity.
pub fn risk_ratios(curve: &EquityCurve, periods_per_year: usize) -> Result<RiskRatios, BacktestError> {
    if curve.equity.len() < 3 {
        return Err(BacktestError::CurveTooShort {
            need: 3,
            got: curve.equity.len(),
        });
    }
    let returns: Vec<f64> = curve
        .equity
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0])
        .collect();
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let ann = (periods_per_year as f64).sqrt();

    let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    let sharpe = if std > 0.0 {
        RatioValue::Defined(mean / std * ann)
    } else {
        RatioValue::Undefined {
            reason: "zero deviation of daily returns".into(),
        }
    };

    let negatives: Vec<f64> = returns.iter().cloned().filter(|&r| r < 0.0).collect();
    let sortino = if negatives.is_empty() {
        RatioValue::Undefined {
            reason: "no negative returns".into(),
        }
    } else {
        let dd = (negatives.iter().map(|r| r * r).sum::<f64>() / negatives.len() as f64).sqrt();
        RatioValue::Defined(mean / dd * ann)
    };

    let mdd = max_drawdown(curve);
    let calmar = if mdd > 0.0 {
        RatioValue::Defined(mean * periods_per_year as f64 / mdd)
    } else {
        RatioValue::Undefined {
            reason: "zero maximum drawdown".into(),
        }
    };

    Ok(RiskRatios {
        sharpe,
        sortino,
        calmar,
    })
}

/// `ER = WR * mean_win - (1 - WR) * |mean_loss|` over trade percent
/// returns. Break-even trades count as losses with value zero. Returns
/// `(er, win_rate, mean_win, mean_loss)`.
pub fn expectancy_ratio(trades: &[TradeRecord]) -> Result<(f64, f64, f64, f64), BacktestError> {
    if trades.is_empty() {
        return Err(BacktestError::NoTrades);
    }
    let winners: Vec<f64> = trades
        .iter()
        .map(|t| t.return_pct)
        .filter(|&r| r > 0.0)
        .collect();
    let losers: Vec<f64> = trades
        .iter()
        .map(|t| t.return_pct)
        .filter(|&r| r <= 0.0)
        .collect();
    let win_rate = winners.len() as f64 / trades.len() as f64;
    let mean_win = if winners.is_empty() {
        0.0
    } else {
        winners.iter().sum::<f64>() / winners.len() as f64
    };
    let mean_loss = if losers.is_empty() {
        0.0
    } else {
        losers.iter().sum::<f64>() / losers.len() as f64
    };
    let er = win_rate * mean_win - (1.0 - win_rate) * mean_loss.abs();
    Ok((er, win_rate, mean_win, mean_loss))
}

/// Percent return of buying the first close and selling the last.
pub fn buy_and_hold(series: &OhlcSeries) -> Result<f64, BacktestError> {
    if series.len() < 2 {
        return Err(BacktestError::SeriesTooShort(series.len()));
    }
    let first = series.bars.first().unwrap().close;
    let last = series.bars.last().unwrap().close;
    Ok((last - first) / first * 100.0)
}
