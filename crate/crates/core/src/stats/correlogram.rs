//! Autocorrelation and partial autocorrelation estimation.
//!
//! The ACF uses the biased (1/n) autocovariance estimator with the
//! full-sample mean, which keeps the autocovariance sequence positive
//! semidefinite and the Durbin-Levinson recursion stable. The PACF is
//! computed from that ACF via Durbin-Levinson.

use super::{mean, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelogramKind {
    Acf,
    Pacf,
}

#[derive(Debug, Clone)]
pub struct CorrelogramResult {
    /// Lags `0..=max_lag`.
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
    pub kind: CorrelogramKind,
}

fn check_input(values: &[f64], max_lag: usize) -> Result<(), StatsError> {
    if max_lag < 1 || values.len() <= max_lag {
        return Err(StatsError::SeriesTooShort {
            len: values.len(),
            need: max_lag + 1,
        });
    }
    Ok(())
}

/// Autocorrelation function at lags `0..=max_lag`.
pub fn acf(values: &[f64], max_lag: usize) -> Result<CorrelogramResult, StatsError> {
    check_input(values, max_lag)?;
    let n = values.len();
    let m = mean(values);
    let centered: Vec<f64> = values.iter().map(|v| v - m).collect();
    let c0: f64 = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let mut out = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        let ck: f64 = (k..n).map(|t| centered[t] * centered[t - k]).sum::<f64>() / n as f64;
        out.push(ck / c0);
    }
    Ok(CorrelogramResult {
        lags: (0..=max_lag).collect(),
        values: out,
        kind: CorrelogramKind::Acf,
    })
}

/// Partial autocorrelation at lags `0..=max_lag` via Durbin-Levinson.
///
/// `pacf[0]` is 1 by convention and `pacf[1] == acf[1]`.
pub fn pacf(values: &[f64], max_lag: usize) -> Result<CorrelogramResult, StatsError> {
    let rho = acf(values, max_lag)?.values;
    let mut out = vec![1.0];
    // phi[j] holds the AR(k) coefficients of the current recursion level.
    let mut phi = vec![0.0; max_lag + 1];
    let mut prev = vec![0.0; max_lag + 1];
    let mut err = 1.0f64;
    for k in 1..=max_lag {
        let acc: f64 = (1..k).map(|j| prev[j] * rho[k - j]).sum();
        if err.abs() < 1e-14 {
            return Err(StatsError::NumericalInstability { lag: k });
        }
        let kappa = (rho[k] - acc) / err;
        phi[k] = kappa;
        for j in 1..k {
            phi[j] = prev[j] - kappa * prev[k - j];
        }
        err *= 1.0 - kappa * kappa;
        out.push(kappa);
        prev[..=k].copy_from_slice(&phi[..=k]);
    }
    Ok(CorrelogramResult {
        lags: (0..=max_lag).collect(),
        values: out,
        kind: CorrelogramKind::Pacf,
    })
}
