//! ARIMA(p,d,q) modelling with optional drift: conditional-sum-of-squares
//! fitting, AIC model comparison, stepwise order search, and multi-step
//! forecasting.
//!
//! The likelihood is the Gaussian conditional sum of squares with pre-sample
//! values fixed at their unconditional mean (zero after centering). Every
//! candidate order therefore scores the same number of residuals, which keeps
//! AIC values directly comparable across orders. Stationarity and
//! invertibility are enforced by optimising in a partial-autocorrelation
//! parameterisation mapped through tanh.

mod search;
mod simplex;

pub use search::{auto_arima_stepwise, AutoArimaResult, TrialRecord};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArimaError {
    #[error("series of length {len} too short for order requiring {need}")]
    SeriesTooShort { len: usize, need: usize },
    #[error("optimizer failed to converge within the iteration cap")]
    NonConvergence,
    #[error("invalid order: {0}")]
    InvalidOrder(String),
    #[error("stepwise search produced no converged model")]
    NoConvergedModel,
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
}

/// Model order plus the drift switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub with_drift: bool,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize, with_drift: bool) -> Self {
        Self { p, d, q, with_drift }
    }

    /// Free parameter count: AR + MA + drift + innovation variance.
    pub fn n_params(&self) -> usize {
        self.p + self.q + usize::from(self.with_drift) + 1
    }

    pub fn label(&self) -> String {
        format!(
            "({},{},{}){}",
            self.p,
            self.d,
            self.q,
            if self.with_drift { "+drift" } else { "" }
        )
    }
}

/// A fitted model, retaining what the forecaster needs.
#[derive(Debug, Clone)]
pub struct ArimaFit {
    pub order: ArimaOrder,
    pub ar_coeffs: Vec<f64>,
    pub ma_coeffs: Vec<f64>,
    pub drift: f64,
    pub sigma2: f64,
    pub log_likelihood: f64,
    pub aic: f64,
    pub residuals: Vec<f64>,
    pub n_fitted: usize,
    /// Last `p` centered values of the differenced series, oldest first.
    diff_tail: Vec<f64>,
    /// Last `q` residuals, oldest first.
    resid_tail: Vec<f64>,
    /// Last observed value of each integration level `diff^j(y)`, j = 0..d.
    level_tails: Vec<f64>,
    /// Last observed value of the original series.
    pub origin_value: f64,
}

#[derive(Debug, Clone)]
pub struct ArimaForecast {
    pub horizon: usize,
    pub mean_path: Vec<f64>,
    pub origin_value: f64,
}

/// Applies the difference operator `d` times.
pub fn difference(values: &[f64], d: usize) -> Result<Vec<f64>, ArimaError> {
    if values.len() <= d {
        return Err(ArimaError::SeriesTooShort {
            len: values.len(),
            need: d + 1,
        });
    }
    let mut out = values.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Maps unconstrained parameters to stationary AR (or invertible MA)
/// coefficients: tanh to partial autocorrelations, then the Levinson step
/// up to the coefficient vector.
fn transform_coeffs(raw: &[f64]) -> Vec<f64> {
    let k = raw.len();
    let pacs: Vec<f64> = raw.iter().map(|r| r.tanh()).collect();
    let mut coeffs = vec![0.0; k];
    let mut work = vec![0.0; k];
    for j in 0..k {
        coeffs[j] = pacs[j];
        for i in 0..j {
            work[i] = coeffs[i] - pacs[j] * coeffs[j - 1 - i];
        }
        coeffs[..j].copy_from_slice(&work[..j]);
    }
    coeffs
}

struct CssEval {
    ssr: f64,
    residuals: Vec<f64>,
}

/// Zero-initialised conditional sum of squares of an ARMA(p,q) on the
/// centered series; every element of `w` contributes a residual.
fn css_residuals(w: &[f64], mu: f64, ar: &[f64], ma: &[f64]) -> CssEval {
    let n = w.len();
    let mut resid = Vec::with_capacity(n);
    let mut ssr = 0.0;
    for t in 0..n {
        let mut pred = 0.0;
        for (i, &phi) in ar.iter().enumerate() {
            if t > i {
                pred += phi * (w[t - 1 - i] - mu);
            }
        }
        for (j, &theta) in ma.iter().enumerate() {
            if t > j {
                pred += theta * resid[t - 1 - j];
            }
        }
        let e = (w[t] - mu) - pred;
        ssr += e * e;
        resid.push(e);
    }
    CssEval { ssr, residuals: resid }
}

fn gaussian_loglik(ssr: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let sigma2 = (ssr / nf).max(f64::MIN_POSITIVE);
    let ll = -0.5 * nf * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    (sigma2, ll)
}

/// Fits an ARIMA model by conditional-sum-of-squares maximum likelihood.
pub fn fit_arima(values: &[f64], order: ArimaOrder) -> Result<ArimaFit, ArimaError> {
    if order.p > 5 || order.q > 5 || order.d > 2 {
        return Err(ArimaError::InvalidOrder(format!(
            "order {} outside the supported range (p,q <= 5, d <= 2)",
            order.label()
        )));
    }
    let need = 10 * (order.p + order.q + 1) + order.d;
    if values.len() < need {
        return Err(ArimaError::SeriesTooShort {
            len: values.len(),
            need,
        });
    }

    let mut level_tails = Vec::with_capacity(order.d);
    let mut w = values.to_vec();
    for _ in 0..order.d {
        level_tails.push(*w.last().unwrap());
        w = w.windows(2).map(|x| x[1] - x[0]).collect();
    }
    let n = w.len();
    let w_mean = w.iter().sum::<f64>() / n as f64;

    let (ar, ma, mu) = if order.p == 0 && order.q == 0 {
        // Closed form: the CSS-optimal constant is the sample mean.
        let mu = if order.with_drift { w_mean } else { 0.0 };
        (Vec::new(), Vec::new(), mu)
    } else {
        let w_std = {
            let var = w.iter().map(|v| (v - w_mean) * (v - w_mean)).sum::<f64>() / n as f64;
            var.sqrt().max(1e-9)
        };
        let dim = order.p + order.q + usize::from(order.with_drift);
        let objective = |params: &[f64]| -> f64 {
            let ar = transform_coeffs(&params[..order.p]);
            let ma = transform_coeffs(&params[order.p..order.p + order.q]);
            let mu = if order.with_drift { params[dim - 1] } else { 0.0 };
            css_residuals(&w, mu, &ar, &ma).ssr
        };

        let mut x0 = vec![0.0; dim];
        let mut steps = vec![0.2; dim];
        if order.with_drift {
            x0[dim - 1] = w_mean;
            steps[dim - 1] = 0.1 * w_std;
        }
        let mut out = simplex::minimize(&objective, &x0, &steps, 2000, 1e-8);
        if !out.converged {
            // One restart from a perturbed start before giving up.
            let perturbed: Vec<f64> = out.x.iter().map(|v| v + 0.05).collect();
            out = simplex::minimize(&objective, &perturbed, &steps, 2000, 1e-8);
            if !out.converged {
                return Err(ArimaError::NonConvergence);
            }
        }
        let ar = transform_coeffs(&out.x[..order.p]);
        let ma = transform_coeffs(&out.x[order.p..order.p + order.q]);
        let mu = if order.with_drift { out.x[dim - 1] } else { 0.0 };
        (ar, ma, mu)
    };

    let eval = css_residuals(&w, mu, &ar, &ma);
    let (sigma2, log_likelihood) = gaussian_loglik(eval.ssr, n);
    let aic = 2.0 * order.n_params() as f64 - 2.0 * log_likelihood;

    let diff_tail: Vec<f64> = w[n.saturating_sub(order.p)..]
        .iter()
        .map(|v| v - mu)
        .collect();
    let resid_tail: Vec<f64> = eval.residuals[n.saturating_sub(order.q)..].to_vec();

    Ok(ArimaFit {
        order,
        ar_coeffs: ar,
        ma_coeffs: ma,
        drift: mu,
        sigma2,
        log_likelihood,
        aic,
        residuals: eval.residuals,
        n_fitted: n,
        diff_tail,
        resid_tail,
        level_tails,
        origin_value: *values.last().unwrap(),
    })
}

/// AIC of a fitted model: `2k - 2 log L`.
pub fn model_aic(fit: &ArimaFit) -> f64 {
    2.0 * fit.order.n_params() as f64 - 2.0 * fit.log_likelihood
}

/// Mean forecast over `horizon` steps.
///
/// The ARMA recursion runs on the differenced, centered scale with future
/// shocks at zero, then the path is re-integrated `d` times from the stored
/// level tails.
pub fn forecast(fit: &ArimaFit, horizon: usize) -> ArimaForecast {
    // Oldest-first centered tail, extended with predictions as steps advance.
    let mut centered = fit.diff_tail.clone();
    let mut shocks = fit.resid_tail.clone();
    let mut w_path = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut pred = 0.0;
        for (i, &phi) in fit.ar_coeffs.iter().enumerate() {
            let idx = centered.len() as isize - 1 - i as isize;
            if idx >= 0 {
                pred += phi * centered[idx as usize];
            }
        }
        for (j, &theta) in fit.ma_coeffs.iter().enumerate() {
            let idx = shocks.len() as isize - 1 - j as isize;
            if idx >= 0 {
                pred += theta * shocks[idx as usize];
            }
        }
        centered.push(pred);
        shocks.push(0.0);
        w_path.push(pred + fit.drift);
    }

    // Integrate back up through each differencing level.
    let mut path = w_path;
    for level in (0..fit.order.d).rev() {
        let mut acc = fit.level_tails[level];
        for v in path.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }

    ArimaForecast {
        horizon,
        mean_path: path,
        origin_value: fit.origin_value,
    }
}

impl ArimaFit {
    /// Key/value text summary of the fit.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("order {}\n", self.order.label()));
        out.push_str(&format!("n_fitted {}\n", self.n_fitted));
        for (i, c) in self.ar_coeffs.iter().enumerate() {
            out.push_str(&format!("ar{} {}\n", i + 1, c));
        }
        for (i, c) in self.ma_coeffs.iter().enumerate() {
            out.push_str(&format!("ma{} {}\n", i + 1, c));
        }
        out.push_str(&format!("drift {}\n", self.drift));
        out.push_str(&format!("sigma2 {}\n", self.sigma2));
        out.push_str(&format!("log_likelihood {}\n", self.log_likelihood));
        out.push_str(&format!("aic {}\n", self.aic));
        out
    }
}
