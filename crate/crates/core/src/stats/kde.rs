//! Gaussian kernel density estimation with Silverman bandwidth selection.

use super::{mean, StatsError};
use crate::parallel::par_map;

#[derive(Debug, Clone)]
pub struct KdeEstimate {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    // Linear interpolation between order statistics.
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Silverman's rule of thumb: `0.9 * min(std, IQR / 1.34) * n^(-1/5)`.
///
/// A zero IQR (heavily tied data) falls back to the standard deviation.
fn silverman_bandwidth(values: &[f64]) -> Result<f64, StatsError> {
    let n = values.len() as f64;
    let m = mean(values);
    let std = (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { std.min(iqr / 1.34) } else { std };
    if spread == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(0.9 * spread * n.powf(-0.2))
}

/// Gaussian-kernel density over an evenly spaced grid spanning the data
/// plus four bandwidths on each side.
pub fn kde_density(
    values: &[f64],
    bandwidth: Option<f64>,
    grid_size: usize,
) -> Result<KdeEstimate, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::SeriesTooShort {
            len: values.len(),
            need: 2,
        });
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 => h,
        Some(_) => return Err(StatsError::ZeroVariance),
        None => silverman_bandwidth(values)?,
    };
    let grid_size = grid_size.max(2);

    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min) - 4.0 * h;
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 4.0 * h;
    let step = (hi - lo) / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|i| lo + step * i as f64).collect();

    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let density = par_map(grid.clone(), |x| {
        let mut acc = 0.0;
        for &v in values {
            let z = (x - v) / h;
            acc += (-0.5 * z * z).exp();
        }
        acc * norm
    });

    Ok(KdeEstimate {
        grid,
        density,
        bandwidth: h,
    })
}

impl KdeEstimate {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, d)| 0.5 * (d[0] + d[1]) * (x[1] - x[0]))
            .sum()
    }
}
