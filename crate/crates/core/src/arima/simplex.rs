//! Derivative-free Nelder-Mead minimiser for the small coefficient spaces
//! searched here (at most six dimensions).

pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const RHO: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

/// Minimises `f` starting from `x0` with per-coordinate initial steps.
/// Converges when the relative spread of simplex values drops below `tol`.
pub fn minimize<F>(f: F, x0: &[f64], steps: &[f64], max_iter: usize, tol: f64) -> SimplexOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();
    assert_eq!(steps.len(), dim);
    if dim == 0 {
        let value = f(x0);
        return SimplexOutcome {
            x: Vec::new(),
            value,
            converged: true,
            iterations: 0,
        };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        // Order ascending by objective.
        let mut idx: Vec<usize> = (0..=dim).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
        let reorder = |v: &Vec<Vec<f64>>| idx.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
        simplex = reorder(&simplex);
        values = idx.iter().map(|&i| values[i]).collect();

        let best = values[0];
        let worst = values[dim];
        let scale = best.abs().max(worst.abs()).max(1e-12);
        if (worst - best).abs() <= tol * scale {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|v| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let point = |coef: f64| -> Vec<f64> {
            (0..dim)
                .map(|j| centroid[j] + coef * (centroid[j] - simplex[dim][j]))
                .collect()
        };

        let reflected = point(ALPHA);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = point(GAMMA);
            let fe = f(&expanded);
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
        } else {
            let contracted = if fr < values[dim] {
                point(RHO)
            } else {
                point(-RHO)
            };
            let fc = f(&contracted);
            if fc < values[dim].min(fr) {
                simplex[dim] = contracted;
                values[dim] = fc;
            } else {
                for i in 1..=dim {
                    for j in 0..dim {
                        simplex[i][j] = simplex[0][j] + SIGMA * (simplex[i][j] - simplex[0][j]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap();
    SimplexOutcome {
        x: simplex[best].clone(),
        value: values[best],
        converged,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic_bowl() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.5).powi(2) + 7.0;
        let out = minimize(f, &[0.0, 0.0], &[0.5, 0.5], 2000, 1e-10);
        assert!(out.converged);
        assert!((out.x[0] - 3.0).abs() < 1e-4);
        assert!((out.x[1] + 1.5).abs() < 1e-4);
        assert!((out.value - 7.0).abs() < 1e-8);
    }

    #[test]
    fn minimizes_rosenbrock_two_dim() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = minimize(f, &[-1.2, 1.0], &[0.1, 0.1], 5000, 1e-12);
        assert!((out.x[0] - 1.0).abs() < 1e-3, "x = {:?}", out.x);
        assert!((out.x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_dimensional_input_is_trivial() {
        let out = minimize(|_| 42.0, &[], &[], 10, 1e-8);
        assert!(out.converged);
        assert_eq!(out.value, 42.0);
    }
}
