//! Augmented Dickey-Fuller unit-root test with AIC lag selection.
//!
//! The test regression is the constant, no-trend form
//!
//! ```text
//! dy_t = alpha + beta * y_{t-1} + sum_{i=1..k} gamma_i * dy_{t-i} + e_t
//! ```
//!
//! fitted by least squares. The lag order `k` is chosen to minimise AIC over
//! `0..=max_lag` with every candidate fitted on the same rows (the sample
//! trimmed to `max_lag`), then the reported regression is refitted with the
//! chosen `k` on the longest available sample. The null hypothesis is a unit
//! root (`beta = 0`); rejection means the series looks stationary.

use super::mackinnon;
use super::StatsError;
use crate::parallel::par_map;

/// 1%/5%/10% Dickey-Fuller critical values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValues {
    pub pct1: f64,
    pub pct5: f64,
    pub pct10: f64,
}

#[derive(Debug, Clone)]
pub struct AdfResult {
    /// t-statistic of the lagged-level coefficient.
    pub test_statistic: f64,
    /// MacKinnon approximate p-value.
    pub p_value: f64,
    /// Selected number of lagged difference terms.
    pub lags_used: usize,
    /// Observations in the reported regression.
    pub n_observations: usize,
    pub critical_values: CriticalValues,
}

struct OlsFit {
    beta_t_stat: f64,
    aic: f64,
    n_rows: usize,
}

/// Least-squares fit of the ADF regression with `k` lagged differences over
/// rows `start..dy.len()` of the difference series. Returns the t-statistic
/// of the level coefficient and the Gaussian AIC.
fn fit_adf_regression(
    y: &[f64],
    dy: &[f64],
    k: usize,
    start: usize,
) -> Result<OlsFit, StatsError> {
    let n_rows = dy.len() - start;
    let n_cols = 2 + k;
    if n_rows <= n_cols {
        return Err(StatsError::SeriesTooShort {
            len: n_rows,
            need: n_cols + 1,
        });
    }

    // Accumulate X'X and X'y directly; the design matrix is never formed.
    let mut xtx = vec![vec![0.0; n_cols]; n_cols];
    let mut xty = vec![0.0; n_cols];
    let mut row = vec![0.0; n_cols];
    let mut yty = 0.0;
    for t in start..dy.len() {
        row[0] = 1.0;
        row[1] = y[t];
        for i in 1..=k {
            row[1 + i] = dy[t - i];
        }
        let target = dy[t];
        yty += target * target;
        for i in 0..n_cols {
            xty[i] += row[i] * target;
            for j in i..n_cols {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..n_cols {
        for j in 0..i {
            xtx[i][j] = xtx[j][i];
        }
    }

    let inv = invert(&xtx).ok_or(StatsError::SingularRegression)?;
    let coeffs: Vec<f64> = (0..n_cols)
        .map(|i| (0..n_cols).map(|j| inv[i][j] * xty[j]).sum())
        .collect();

    // RSS = y'y - 2 b'X'y + b'X'X b, accumulated without residual storage.
    let mut btxtxb = 0.0;
    for i in 0..n_cols {
        for j in 0..n_cols {
            btxtxb += coeffs[i] * xtx[i][j] * coeffs[j];
        }
    }
    let btxty: f64 = coeffs.iter().zip(&xty).map(|(b, v)| b * v).sum();
    let rss = (yty - 2.0 * btxty + btxtxb).max(0.0);

    let dof = n_rows - n_cols;
    let sigma2 = rss / dof as f64;
    let se_beta = (sigma2 * inv[1][1]).sqrt();
    if !se_beta.is_finite() || se_beta == 0.0 {
        return Err(StatsError::SingularRegression);
    }

    let nf = n_rows as f64;
    let aic = nf * (rss / nf).ln() + 2.0 * (n_cols as f64 + 1.0);
    Ok(OlsFit {
        beta_t_stat: coeffs[1] / se_beta,
        aic,
        n_rows,
    })
}

fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        let d = m[col][col];
        for j in 0..2 * n {
            m[col][j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for j in 0..2 * n {
                        m[r][j] -= f * m[col][j];
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Default lag cap: `floor(12 * (n / 100)^(1/4))`.
pub fn default_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Augmented Dickey-Fuller test with AIC-selected lag order.
///
/// `max_lag` defaults to `floor(12 * (n/100)^0.25)` when not given.
pub fn adf_test(values: &[f64], max_lag: Option<usize>) -> Result<AdfResult, StatsError> {
    let n = values.len();
    if n < 20 {
        return Err(StatsError::SeriesTooShort { len: n, need: 20 });
    }
    let mut max_lag = max_lag.unwrap_or_else(|| default_max_lag(n));
    // Keep enough rows to estimate the largest candidate regression.
    let cap = (n - 1).saturating_sub(8) / 2;
    max_lag = max_lag.min(cap);

    // dy[t] = y[t+1] - y[t]; row t regresses dy[t] on y[t] and lagged dy.
    let dy: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();

    let fits = par_map((0..=max_lag).collect::<Vec<_>>(), |k| {
        fit_adf_regression(values, &dy, k, max_lag)
    });
    let mut best_k = 0;
    let mut best_aic = f64::INFINITY;
    for (k, fit) in fits.into_iter().enumerate() {
        let fit = fit?;
        if fit.aic < best_aic {
            best_aic = fit.aic;
            best_k = k;
        }
    }

    let fit = fit_adf_regression(values, &dy, best_k, best_k)?;
    let [pct1, pct5, pct10] = mackinnon::tau_critical_values(fit.n_rows);
    Ok(AdfResult {
        test_statistic: fit.beta_t_stat,
        p_value: mackinnon::tau_p_value(fit.beta_t_stat),
        lags_used: best_k,
        n_observations: fit.n_rows,
        critical_values: CriticalValues { pct1, pct5, pct10 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn random_walk(n: usize, seed: u64, drift: f64) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut y = Vec::with_capacity(n);
        let mut level = 100.0;
        for _ in 0..n {
            level += drift + rng.gen::<f64>() - 0.5;
            y.push(level);
        }
        y
    }

    fn ar1(coeff: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        let mut prev = 0.0;
        for _ in 0..n {
            prev = coeff * prev + rng.gen::<f64>() - 0.5;
            out.push(prev);
        }
        out
    }

    #[test]
    fn random_walk_fails_to_reject() {
        let y = random_walk(2000, 5, 0.0);
        let r = adf_test(&y, None).unwrap();
        assert!(r.p_value > 0.05, "p = {}", r.p_value);
        assert!(r.n_observations < y.len());
    }

    #[test]
    fn stationary_ar1_rejects() {
        let y = ar1(0.5, 2000, 6);
        let r = adf_test(&y, None).unwrap();
        assert!(r.p_value < 0.01, "p = {}", r.p_value);
        assert!(r.test_statistic < r.critical_values.pct1);
    }

    #[test]
    fn critical_values_are_ordered() {
        let y = random_walk(500, 9, 0.0);
        let r = adf_test(&y, None).unwrap();
        assert!(r.critical_values.pct1 < r.critical_values.pct5);
        assert!(r.critical_values.pct5 < r.critical_values.pct10);
    }

    #[test]
    fn statistic_invariant_under_constant_shift() {
        let y = random_walk(800, 12, 0.01);
        let shifted: Vec<f64> = y.iter().map(|v| v + 500.0).collect();
        let a = adf_test(&y, Some(8)).unwrap();
        let b = adf_test(&shifted, Some(8)).unwrap();
        assert!((a.test_statistic - b.test_statistic).abs() < 1e-6);
        assert_eq!(a.lags_used, b.lags_used);
    }

    #[test]
    fn short_series_rejected() {
        assert!(matches!(
            adf_test(&[1.0; 10], None),
            Err(StatsError::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn default_lag_rule() {
        assert_eq!(default_max_lag(2537), 26);
        assert_eq!(default_max_lag(100), 12);
        assert_eq!(default_max_lag(50), 10);
    }
}
