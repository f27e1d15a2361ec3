//! MacKinnon response-surface approximations for the Dickey-Fuller tau
//! distribution, constant-only regression, single series (N = 1).
//!
//! P-value polynomials are from MacKinnon (1994), "Approximate asymptotic
//! distribution functions for unit-root and cointegration tests"; critical
//! values are from MacKinnon (2010), "Critical values for cointegration
//! tests", QED working paper 1227 (the 2010 revision of the 1991 tables).

use statrs::distribution::{ContinuousCDF, Normal};

/// Outside `[TAU_MIN, TAU_MAX]` the surface saturates at p = 0 or 1.
const TAU_MAX_C: f64 = 2.74;
const TAU_MIN_C: f64 = -18.83;
/// Below this statistic the small-p polynomial applies.
const TAU_STAR_C: f64 = -1.61;

/// Phi^-1(p) ~ poly(tau), ascending coefficient order.
const TAU_C_SMALLP: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
const TAU_C_LARGEP: [f64; 4] = [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2];

/// cv(n) = b0 + b1/n + b2/n^2 + b3/n^3 at the 1%, 5%, and 10% levels.
const TAU_C_2010: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];

fn polyval_ascending(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Approximate p-value for an ADF tau statistic (constant regression).
pub fn tau_p_value(stat: f64) -> f64 {
    if stat > TAU_MAX_C {
        return 1.0;
    }
    if stat < TAU_MIN_C {
        return 0.0;
    }
    let poly: &[f64] = if stat <= TAU_STAR_C {
        &TAU_C_SMALLP
    } else {
        &TAU_C_LARGEP
    };
    let normal = Normal::new(0.0, 1.0).unwrap();
    normal.cdf(polyval_ascending(poly, stat))
}

/// Finite-sample 1%/5%/10% critical values for `n_obs` regression observations.
pub fn tau_critical_values(n_obs: usize) -> [f64; 3] {
    let n = n_obs as f64;
    let cv = |row: &[f64; 4]| row[0] + row[1] / n + row[2] / (n * n) + row[3] / (n * n * n);
    [cv(&TAU_C_2010[0]), cv(&TAU_C_2010[1]), cv(&TAU_C_2010[2])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn p_value_saturates_at_extremes() {
        assert_eq!(tau_p_value(3.0), 1.0);
        assert_eq!(tau_p_value(-25.0), 0.0);
    }

    #[test]
    fn p_value_is_monotone_in_stat() {
        let stats = [-6.0, -4.0, -3.0, -2.5, -2.0, -1.0, 0.0, 1.0];
        let ps: Vec<f64> = stats.iter().map(|&s| tau_p_value(s)).collect();
        assert!(ps.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn critical_values_ordered_and_near_asymptotic() {
        let [c1, c5, c10] = tau_critical_values(2530);
        assert!(c1 < c5 && c5 < c10);
        assert_relative_eq!(c1, -3.432, epsilon = 5e-3);
        assert_relative_eq!(c5, -2.863, epsilon = 5e-3);
        assert_relative_eq!(c10, -2.567, epsilon = 5e-3);
    }

    #[test]
    fn p_value_small_at_deep_rejection() {
        assert!(tau_p_value(-4.0) < 0.01);
        assert!(tau_p_value(-1.0) > 0.5);
    }
}
