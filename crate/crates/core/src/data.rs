//! OHLC market-data model: CSV ingestion, validation, slicing, and derived
//! return/volatility series.
//!
//! The expected input is daily-bar CSV with a header naming at least
//! `Date,Open,High,Low,Close`; `Adj Close` and `Volume` are kept when present
//! and any other column is ignored. Dates are exchange trading days — no
//! calendar-gap filling is performed.

use chrono::NaiveDate;
use std::io::Read;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing required column `{0}` in CSV header")]
    MissingColumn(String),
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("no data rows after the header")]
    EmptySeries,
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("validation length {validation_len} out of range for series of length {len}")]
    InvalidSplit { validation_len: usize, len: usize },
    #[error("series of length {len} too short (need more than {need})")]
    SeriesTooShort { len: usize, need: usize },
    #[error("cannot standardize a series with zero variance")]
    ZeroVariance,
    #[error("window {window} exceeds series length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("csv read error: {0}")]
    Csv(#[from] csv::Error),
}

/// One of the four daily price channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Open,
    High,
    Low,
    Close,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Open, Channel::High, Channel::Low, Channel::Close];

    pub fn name(self) -> &'static str {
        match self {
            Channel::Open => "open",
            Channel::High => "high",
            Channel::Low => "low",
            Channel::Close => "close",
        }
    }
}

/// A single daily bar.
///
/// Bars with `low == high` (no intrabar movement, e.g. halted trading) are
/// accepted and flagged via [`OhlcBar::is_flat`] rather than rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct OhlcBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub adj_close: Option<f64>,
    pub volume: Option<f64>,
}

impl OhlcBar {
    pub fn channel(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Open => self.open,
            Channel::High => self.high,
            Channel::Low => self.low,
            Channel::Close => self.close,
        }
    }

    /// True when the bar shows no intrabar movement (`low == high`).
    pub fn is_flat(&self) -> bool {
        self.low == self.high
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.low > 0.0) {
            return Err(format!("low {} must be positive", self.low));
        }
        if self.low > self.high {
            return Err(format!("low {} above high {}", self.low, self.high));
        }
        for (name, v) in [("open", self.open), ("close", self.close)] {
            if v < self.low || v > self.high {
                return Err(format!("{name} {v} outside [{}, {}]", self.low, self.high));
            }
        }
        Ok(())
    }
}

/// Date-ordered OHLC history for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct OhlcSeries {
    pub symbol: String,
    pub bars: Vec<OhlcBar>,
}

/// Simple step returns of one channel: `values[i] = (z[i+step] - z[i]) / z[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
    pub step: usize,
    pub channel: Channel,
}

impl OhlcSeries {
    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn channel_values(&self, channel: Channel) -> Vec<f64> {
        self.bars.iter().map(|b| b.channel(channel)).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.bars.iter().map(|b| b.date).collect()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.bars.first().map(|b| b.date)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.bars.last().map(|b| b.date)
    }

    /// Index of the bar at `date`, if present.
    pub fn position(&self, date: NaiveDate) -> Option<usize> {
        self.bars.binary_search_by_key(&date, |b| b.date).ok()
    }

    /// Indices of bars flagged as flat (`low == high`).
    pub fn flat_bars(&self) -> Vec<usize> {
        self.bars
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_flat())
            .map(|(i, _)| i)
            .collect()
    }

    /// Sub-series over `[start, end)` bar indices.
    pub fn slice(&self, start: usize, end: usize) -> OhlcSeries {
        OhlcSeries {
            symbol: self.symbol.clone(),
            bars: self.bars[start..end].to_vec(),
        }
    }
}

fn parse_price(field: &str, line: u64, column: &str) -> Result<f64, DataError> {
    field.trim().parse::<f64>().map_err(|_| DataError::MalformedRow {
        line,
        reason: format!("unparseable {column} value `{field}`"),
    })
}

/// Parses OHLC history from CSV.
///
/// Rows are re-ordered to ascending date; a repeated date is an error. Any
/// row whose date or price fields fail to parse is rejected with its line
/// number.
pub fn parse_ohlc_csv<R: Read>(reader: R, symbol: &str) -> Result<OhlcSeries, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let date_col = find("Date")?;
    let open_col = find("Open")?;
    let high_col = find("High")?;
    let low_col = find("Low")?;
    let close_col = find("Close")?;
    let adj_col = headers.iter().position(|h| h.eq_ignore_ascii_case("Adj Close"));
    let vol_col = headers.iter().position(|h| h.eq_ignore_ascii_case("Volume"));

    let mut bars = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let get = |col: usize| {
            record.get(col).ok_or_else(|| DataError::MalformedRow {
                line,
                reason: format!("missing field in column {col}"),
            })
        };

        let date_str = get(date_col)?;
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d").map_err(|_| {
            DataError::MalformedRow {
                line,
                reason: format!("unparseable date `{date_str}` (expected YYYY-MM-DD)"),
            }
        })?;
        let bar = OhlcBar {
            date,
            open: parse_price(get(open_col)?, line, "Open")?,
            high: parse_price(get(high_col)?, line, "High")?,
            low: parse_price(get(low_col)?, line, "Low")?,
            close: parse_price(get(close_col)?, line, "Close")?,
            adj_close: adj_col
                .and_then(|c| record.get(c))
                .filter(|s| !s.is_empty())
                .map(|s| parse_price(s, line, "Adj Close"))
                .transpose()?,
            volume: vol_col
                .and_then(|c| record.get(c))
                .filter(|s| !s.is_empty())
                .map(|s| parse_price(s, line, "Volume"))
                .transpose()?,
        };
        bar.validate()
            .map_err(|reason| DataError::MalformedRow { line, reason })?;
        bars.push(bar);
    }

    if bars.is_empty() {
        return Err(DataError::EmptySeries);
    }
    bars.sort_by_key(|b| b.date);
    for pair in bars.windows(2) {
        if pair[0].date == pair[1].date {
            return Err(DataError::DuplicateDate(pair[0].date));
        }
    }
    Ok(OhlcSeries {
        symbol: symbol.to_string(),
        bars,
    })
}

/// Serializes a series back to CSV with six decimal places per price.
pub fn write_ohlc_csv(series: &OhlcSeries) -> String {
    let mut out = String::from("Date,Open,High,Low,Close,Adj Close,Volume\n");
    for bar in &series.bars {
        let adj = bar
            .adj_close
            .map(|v| format!("{v:.6}"))
            .unwrap_or_default();
        let vol = bar.volume.map(|v| format!("{v:.0}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{},{}\n",
            bar.date, bar.open, bar.high, bar.low, bar.close, adj, vol
        ));
    }
    out
}

/// Splits off the last `validation_len` bars.
///
/// The concatenation of the two halves reproduces the input exactly.
pub fn split_series(
    series: &OhlcSeries,
    validation_len: usize,
) -> Result<(OhlcSeries, OhlcSeries), DataError> {
    let len = series.len();
    if validation_len == 0 || validation_len >= len {
        return Err(DataError::InvalidSplit {
            validation_len,
            len,
        });
    }
    let cut = len - validation_len;
    Ok((series.slice(0, cut), series.slice(cut, len)))
}

/// Simple `step`-bar returns of one channel.
pub fn simple_returns(
    series: &OhlcSeries,
    channel: Channel,
    step: usize,
) -> Result<ReturnSeries, DataError> {
    let z = series.channel_values(channel);
    if step < 1 || z.len() <= step {
        return Err(DataError::SeriesTooShort {
            len: z.len(),
            need: step,
        });
    }
    let values = (0..z.len() - step)
        .map(|i| (z[i + step] - z[i]) / z[i])
        .collect();
    Ok(ReturnSeries {
        values,
        step,
        channel,
    })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_std(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Centers and rescales returns to zero mean and unit sample deviation.
pub fn standardize_returns(returns: &ReturnSeries) -> Result<ReturnSeries, DataError> {
    let values = &returns.values;
    if values.len() < 2 {
        return Err(DataError::SeriesTooShort {
            len: values.len(),
            need: 1,
        });
    }
    let m = mean(values);
    let s = sample_std(values);
    if s == 0.0 {
        return Err(DataError::ZeroVariance);
    }
    Ok(ReturnSeries {
        values: values.iter().map(|v| (v - m) / s).collect(),
        step: returns.step,
        channel: returns.channel,
    })
}

/// Rolling sample deviation of returns over a trailing `window`.
///
/// Output has `len - window + 1` entries; entry `i` covers
/// `values[i ..= i + window - 1]`.
pub fn rolling_volatility(returns: &ReturnSeries, window: usize) -> Result<Vec<f64>, DataError> {
    let values = &returns.values;
    if window < 2 || values.len() < window {
        return Err(DataError::WindowTooLarge {
            window,
            len: values.len(),
        });
    }
    Ok(values
        .windows(window)
        .map(sample_std)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SAMPLE: &str = "\
Date,Open,High,Low,Close,Adj Close,Volume
2021-01-04,10.0,11.0,9.5,10.5,10.5,1000
2021-01-05,10.5,12.0,10.1,11.8,11.8,1500
2021-01-06,11.8,12.5,11.0,11.2,11.2,900
";

    fn sample_series() -> OhlcSeries {
        parse_ohlc_csv(SAMPLE.as_bytes(), "TEST").unwrap()
    }

    #[test]
    fn parses_three_valid_rows() {
        let s = sample_series();
        assert_eq!(s.len(), 3);
        assert!(s.bars.windows(2).all(|w| w[0].date < w[1].date));
        assert_eq!(s.bars[0].close, 10.5);
        assert_eq!(s.bars[2].volume, Some(900.0));
    }

    #[test]
    fn header_only_is_empty_series() {
        let err = parse_ohlc_csv("Date,Open,High,Low,Close\n".as_bytes(), "T").unwrap_err();
        assert!(matches!(err, DataError::EmptySeries));
    }

    #[test]
    fn missing_column_reported_by_name() {
        let err = parse_ohlc_csv("Date,Open,High,Low\n2021-01-04,1,2,0.5\n".as_bytes(), "T")
            .unwrap_err();
        assert!(matches!(err, DataError::MissingColumn(c) if c == "Close"));
    }

    #[test]
    fn unparseable_price_reports_line() {
        let text = "Date,Open,High,Low,Close\n2021-01-04,1.0,2.0,0.5,oops\n";
        let err = parse_ohlc_csv(text.as_bytes(), "T").unwrap_err();
        match err {
            DataError::MalformedRow { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_date_rejected() {
        let text = "Date,Open,High,Low,Close\n\
                    2021-01-04,1.0,2.0,0.5,1.5\n\
                    2021-01-04,1.0,2.0,0.5,1.5\n";
        let err = parse_ohlc_csv(text.as_bytes(), "T").unwrap_err();
        assert!(matches!(err, DataError::DuplicateDate(_)));
    }

    #[test]
    fn out_of_order_rows_are_sorted() {
        let text = "Date,Open,High,Low,Close\n\
                    2021-01-06,1.0,2.0,0.5,1.5\n\
                    2021-01-04,1.0,2.0,0.5,1.5\n";
        let s = parse_ohlc_csv(text.as_bytes(), "T").unwrap();
        assert!(s.bars[0].date < s.bars[1].date);
    }

    #[test]
    fn flat_bar_accepted_and_flagged() {
        let text = "Date,Open,High,Low,Close\n2021-01-04,5.0,5.0,5.0,5.0\n";
        let s = parse_ohlc_csv(text.as_bytes(), "T").unwrap();
        assert_eq!(s.flat_bars(), vec![0]);
    }

    #[test]
    fn invalid_bar_geometry_rejected() {
        let text = "Date,Open,High,Low,Close\n2021-01-04,5.0,4.0,4.5,4.2\n";
        assert!(parse_ohlc_csv(text.as_bytes(), "T").is_err());
        let text = "Date,Open,High,Low,Close\n2021-01-04,4.6,5.0,4.5,5.2\n";
        assert!(parse_ohlc_csv(text.as_bytes(), "T").is_err());
    }

    #[test]
    fn csv_round_trip_is_exact_at_six_decimals() {
        let s = sample_series();
        let text = write_ohlc_csv(&s);
        let back = parse_ohlc_csv(text.as_bytes(), "TEST").unwrap();
        for (a, b) in s.bars.iter().zip(back.bars.iter()) {
            assert_eq!(a.date, b.date);
            assert_eq!(a.open, b.open);
            assert_eq!(a.high, b.high);
            assert_eq!(a.low, b.low);
            assert_eq!(a.close, b.close);
        }
    }

    #[test]
    fn split_lengths_and_concat_identity() {
        let s = sample_series();
        let (train, validation) = split_series(&s, 1).unwrap();
        assert_eq!(train.len(), 2);
        assert_eq!(validation.len(), 1);
        let mut rejoined = train.bars.clone();
        rejoined.extend(validation.bars.clone());
        assert_eq!(rejoined, s.bars);
    }

    #[test]
    fn split_rejects_out_of_range() {
        let s = sample_series();
        assert!(matches!(
            split_series(&s, 3),
            Err(DataError::InvalidSplit { .. })
        ));
        assert!(matches!(
            split_series(&s, 0),
            Err(DataError::InvalidSplit { .. })
        ));
    }

    fn close_only(prices: &[f64]) -> OhlcSeries {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        OhlcSeries {
            symbol: "T".into(),
            bars: prices
                .iter()
                .enumerate()
                .map(|(i, &p)| OhlcBar {
                    date: start + chrono::Days::new(i as u64),
                    open: p,
                    high: p * 1.01,
                    low: p * 0.99,
                    close: p,
                    adj_close: None,
                    volume: None,
                })
                .collect(),
        }
    }

    #[test]
    fn simple_return_analytic_case() {
        let s = close_only(&[100.0, 110.0]);
        let r = simple_returns(&s, Channel::Close, 1).unwrap();
        assert_relative_eq!(r.values[0], 0.10, max_relative = 1e-12);
    }

    #[test]
    fn constant_prices_give_zero_returns() {
        let s = close_only(&[5.0; 10]);
        let r = simple_returns(&s, Channel::Close, 2).unwrap();
        assert_eq!(r.values.len(), 8);
        assert!(r.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn returns_too_short() {
        let s = close_only(&[1.0, 2.0]);
        assert!(simple_returns(&s, Channel::Close, 2).is_err());
    }

    #[test]
    fn standardize_moments() {
        let s = close_only(&[3.0, 4.5, 4.1, 5.2, 4.9, 6.3, 5.8, 7.0]);
        let r = simple_returns(&s, Channel::Close, 1).unwrap();
        let z = standardize_returns(&r).unwrap();
        assert_relative_eq!(mean(&z.values), 0.0, epsilon = 1e-12);
        assert_relative_eq!(sample_std(&z.values), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn standardize_symmetric_pair() {
        let r = ReturnSeries {
            values: vec![-1.0, 1.0],
            step: 1,
            channel: Channel::Close,
        };
        let z = standardize_returns(&r).unwrap();
        assert_relative_eq!(z.values[0], -z.values[1], epsilon = 1e-12);
        assert_relative_eq!(sample_std(&z.values), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn standardize_constant_is_zero_variance() {
        let r = ReturnSeries {
            values: vec![1.0, 1.0, 1.0],
            step: 1,
            channel: Channel::Close,
        };
        assert!(matches!(
            standardize_returns(&r),
            Err(DataError::ZeroVariance)
        ));
    }

    #[test]
    fn rolling_volatility_brute_force() {
        // Deterministic pseudo-random returns; oracle recomputes each window.
        let mut state = 123456789u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 31) as f64) - 0.5
        };
        let values: Vec<f64> = (0..200).map(|_| next()).collect();
        let r = ReturnSeries {
            values: values.clone(),
            step: 1,
            channel: Channel::Close,
        };
        let vol = rolling_volatility(&r, 21).unwrap();
        assert_eq!(vol.len(), values.len() - 21 + 1);
        for (i, v) in vol.iter().enumerate() {
            let window = &values[i..i + 21];
            assert_relative_eq!(*v, sample_std(window), epsilon = 1e-12);
        }
    }

    #[test]
    fn rolling_volatility_edge_cases() {
        let r = ReturnSeries {
            values: vec![0.5; 30],
            step: 1,
            channel: Channel::Close,
        };
        let vol = rolling_volatility(&r, 30).unwrap();
        assert_eq!(vol.len(), 1);
        assert_eq!(vol[0], 0.0);
        assert!(rolling_volatility(&r, 31).is_err());
    }

    #[test]
    fn returns_uncompound_to_prices() {
        let prices = [10.0, 10.4, 10.1, 11.3, 11.0, 12.2];
        let s = close_only(&prices);
        let r = simple_returns(&s, Channel::Close, 1).unwrap();
        for i in 0..r.values.len() {
            assert_relative_eq!(
                prices[i] * (1.0 + r.values[i]),
                prices[i + 1],
                max_relative = 1e-9
            );
        }
    }
}
