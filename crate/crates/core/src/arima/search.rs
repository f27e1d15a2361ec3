//! Stepwise ARIMA order search in the Hyndman-Khandakar style.
//!
//! The differencing order is chosen first by repeated unit-root tests, then
//! a small set of starting orders is fitted and the search walks to
//! neighbouring orders of the incumbent until AIC stops improving.
//! Candidate fits within one round are independent and evaluated in
//! parallel; the frontier update is sequential.

use super::{difference, fit_arima, ArimaError, ArimaFit, ArimaOrder};
use crate::parallel::par_map;
use crate::stats::adf_test;
use std::collections::HashSet;

/// One attempted order and its outcome.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub order: ArimaOrder,
    /// `None` when the fit failed to converge.
    pub aic: Option<f64>,
}

#[derive(Debug)]
pub struct AutoArimaResult {
    pub best: ArimaFit,
    /// Differencing order selected by the unit-root tests.
    pub d: usize,
    /// Every order attempted, in evaluation order.
    pub trials: Vec<TrialRecord>,
}

/// Differencing order: difference until the ADF test rejects a unit root at
/// the 5% level or `max_d` is reached.
fn select_d(values: &[f64], max_d: usize) -> Result<usize, ArimaError> {
    let mut current = values.to_vec();
    let mut d = 0;
    loop {
        let adf = adf_test(&current, None)?;
        if adf.p_value < 0.05 || d == max_d {
            return Ok(d);
        }
        current = difference(&current, 1)?;
        d += 1;
    }
}

fn candidate_drift_variants(p: usize, d: usize, q: usize) -> Vec<ArimaOrder> {
    if d <= 1 {
        vec![
            ArimaOrder::new(p, d, q, true),
            ArimaOrder::new(p, d, q, false),
        ]
    } else {
        vec![ArimaOrder::new(p, d, q, false)]
    }
}

/// Evaluates a batch of untried candidates, recording every outcome and
/// keeping the minimum-AIC fit.
fn evaluate_batch(
    values: &[f64],
    batch: Vec<ArimaOrder>,
    tried: &mut HashSet<ArimaOrder>,
    trials: &mut Vec<TrialRecord>,
    best: &mut Option<ArimaFit>,
) {
    let mut fresh: Vec<ArimaOrder> = Vec::new();
    for order in batch {
        if tried.insert(order) {
            fresh.push(order);
        }
    }
    let fits = par_map(fresh, |order| (order, fit_arima(values, order)));
    for (order, outcome) in fits {
        match outcome {
            Ok(fit) => {
                trials.push(TrialRecord {
                    order,
                    aic: Some(fit.aic),
                });
                if best.as_ref().map_or(true, |b| fit.aic < b.aic) {
                    *best = Some(fit);
                }
            }
            Err(_) => trials.push(TrialRecord { order, aic: None }),
        }
    }
}

/// Stepwise minimum-AIC order search.
pub fn auto_arima_stepwise(
    values: &[f64],
    max_p: usize,
    max_q: usize,
    max_d: usize,
) -> Result<AutoArimaResult, ArimaError> {
    let d = select_d(values, max_d)?;

    let mut tried: HashSet<ArimaOrder> = HashSet::new();
    let mut trials: Vec<TrialRecord> = Vec::new();
    let mut best: Option<ArimaFit> = None;

    let start_orders = [(2.min(max_p), 2.min(max_q)), (0, 0), (1.min(max_p), 0), (0, 1.min(max_q))];
    let start: Vec<ArimaOrder> = start_orders
        .iter()
        .flat_map(|&(p, q)| candidate_drift_variants(p, d, q))
        .collect();
    evaluate_batch(values, start, &mut tried, &mut trials, &mut best);

    loop {
        let Some(incumbent) = best.as_ref() else {
            break;
        };
        let before = incumbent.aic;
        let (p, q) = (incumbent.order.p as isize, incumbent.order.q as isize);
        let mut neighbours: Vec<ArimaOrder> = Vec::new();
        for (dp, dq) in [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (1, 1), (-1, 1), (1, -1)] {
            let (np, nq) = (p + dp, q + dq);
            if np >= 0 && nq >= 0 && np as usize <= max_p && nq as usize <= max_q {
                neighbours.extend(candidate_drift_variants(np as usize, d, nq as usize));
            }
        }
        neighbours.retain(|order| !tried.contains(order));
        if neighbours.is_empty() {
            break;
        }
        evaluate_batch(values, neighbours, &mut tried, &mut trials, &mut best);
        if best.as_ref().map(|b| b.aic) == Some(before) {
            break;
        }
    }

    match best {
        Some(fit) => Ok(AutoArimaResult { best: fit, d, trials }),
        None => Err(ArimaError::NoConvergedModel),
    }
}
