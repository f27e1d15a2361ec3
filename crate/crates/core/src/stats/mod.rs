//! Time-series diagnostics: correlograms, the augmented Dickey-Fuller
//! unit-root test, and kernel density estimation.

mod correlogram;
mod kde;
mod mackinnon;
mod unit_root;

pub use correlogram::{acf, pacf, CorrelogramKind, CorrelogramResult};
pub use kde::{kde_density, KdeEstimate};
pub use unit_root::{adf_test, AdfResult, CriticalValues};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("series of length {len} too short (need at least {need})")]
    SeriesTooShort { len: usize, need: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("Durbin-Levinson recursion became numerically unstable at lag {lag}")]
    NumericalInstability { lag: usize },
    #[error("singular regression matrix in ADF fit")]
    SingularRegression,
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
