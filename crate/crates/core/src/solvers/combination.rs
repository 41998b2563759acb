//! Constrained least-squares forecast combination.
//!
//! Fits `min ‖Ŷω + b − y‖²` over `ω ≥ 0`, optionally with `Σω = 1`. The
//! intercept is profiled out by centering, which leaves a convex quadratic
//! program in at most a handful of variables. It is solved with a primal
//! active-set method over the bound constraints.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintMode {
    /// `ω ≥ 0` and `Σω = 1`.
    SimplexFixedSum,
    /// `ω ≥ 0` only.
    NonNegativeOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationWeights {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub mode: ConstraintMode,
}

impl CombinationWeights {
    /// Equal weights with a zero intercept, used before any history exists.
    pub fn uniform(n: usize, mode: ConstraintMode) -> Self {
        CombinationWeights {
            weights: vec![1.0 / n as f64; n],
            intercept: 0.0,
            mode,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Applies fitted weights: `ωᵀŷ + b`.
pub fn predict_combination(weights: &CombinationWeights, predictions: &[f64]) -> Result<f64> {
    if predictions.len() != weights.weights.len() {
        return Err(Error::input(format!(
            "combination expects {} member predictions, got {}",
            weights.weights.len(),
            predictions.len()
        )));
    }
    Ok(weights.intercept
        + weights
            .weights
            .iter()
            .zip(predictions)
            .map(|(w, p)| w * p)
            .sum::<f64>())
}

/// Residual sum of squares of a combination on a sample.
pub fn combination_objective(
    predictions: &DMatrix<f64>,
    actuals: &[f64],
    weights: &CombinationWeights,
) -> f64 {
    predictions
        .row_iter()
        .zip(actuals)
        .map(|(row, y)| {
            let fit = weights.intercept + row.iter().zip(&weights.weights).map(|(p, w)| p * w).sum::<f64>();
            (fit - y).powi(2)
        })
        .sum()
}

fn columns_identical(predictions: &DMatrix<f64>) -> bool {
    let scale = predictions.amax().max(1.0);
    let first = predictions.column(0);
    predictions
        .column_iter()
        .skip(1)
        .all(|c| (c - first).amax() <= 1e-12 * scale)
}

pub fn fit_combination(
    predictions: &DMatrix<f64>,
    actuals: &[f64],
    mode: ConstraintMode,
) -> Result<CombinationWeights> {
    let (m, n) = predictions.shape();
    if n == 0 {
        return Err(Error::input("combination needs at least one member"));
    }
    if actuals.len() != m {
        return Err(Error::input(format!(
            "{} actuals for {} prediction rows",
            actuals.len(),
            m
        )));
    }
    if m < n {
        return Err(Error::input(format!(
            "combination needs at least as many observations as members ({m} < {n})"
        )));
    }
    if predictions.iter().any(|v| !v.is_finite()) || actuals.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite value in combination inputs"));
    }

    let mf = m as f64;
    let col_mean: Vec<f64> = predictions.column_iter().map(|c| c.sum() / mf).collect();
    let y_mean = actuals.iter().sum::<f64>() / mf;

    let weights = if columns_identical(predictions) {
        vec![1.0 / n as f64; n]
    } else {
        let mut centered = predictions.clone();
        for (j, mut col) in centered.column_iter_mut().enumerate() {
            col.add_scalar_mut(-col_mean[j]);
        }
        let yc = DVector::from_iterator(m, actuals.iter().map(|v| v - y_mean));
        let q = centered.tr_mul(&centered);
        let c = centered.tr_mul(&yc);
        solve_qp(&q, &c, mode)
    };

    let intercept = y_mean - weights.iter().zip(&col_mean).map(|(w, mu)| w * mu).sum::<f64>();
    Ok(CombinationWeights {
        weights,
        intercept,
        mode,
    })
}

const MAX_ACTIVE_SET_ITERS: usize = 200;

/// Minimizes `½ωᵀQω − cᵀω` subject to `ω ≥ 0` (and `Σω = 1` in simplex mode).
fn solve_qp(q: &DMatrix<f64>, c: &DVector<f64>, mode: ConstraintMode) -> Vec<f64> {
    let n = c.len();
    let simplex = mode == ConstraintMode::SimplexFixedSum;
    let scale = q.amax().max(c.amax()).max(f64::MIN_POSITIVE);
    let step_tol = 1e-13;
    let mult_tol = 1e-11 * scale;

    let mut w = vec![1.0 / n as f64; n];
    let mut active = vec![false; n];

    for _ in 0..MAX_ACTIVE_SET_ITERS {
        let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
        let grad: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| q[(i, j)] * w[j]).sum::<f64>() - c[i])
            .collect();

        let (step, nu) = equality_step(q, &grad, &free, simplex);
        let step_norm = step.iter().fold(0.0_f64, |a, s| a.max(s.abs()));

        if step_norm <= step_tol {
            // stationary on the working set: check bound multipliers
            let mut worst: Option<(usize, f64)> = None;
            for i in (0..n).filter(|&i| active[i]) {
                let mu = grad[i] - nu;
                if mu < -mult_tol && worst.map_or(true, |(_, m)| mu < m) {
                    worst = Some((i, mu));
                }
            }
            match worst {
                Some((i, _)) => active[i] = false,
                None => break,
            }
            continue;
        }

        // longest feasible step along `step`
        let mut alpha = 1.0;
        let mut blocking = None;
        for &i in &free {
            if step[i] < 0.0 {
                let ratio = -w[i] / step[i];
                if ratio < alpha {
                    alpha = ratio;
                    blocking = Some(i);
                }
            }
        }
        for i in 0..n {
            w[i] += alpha * step[i];
        }
        if let Some(i) = blocking {
            w[i] = 0.0;
            active[i] = true;
        }
    }

    for v in &mut w {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    if simplex {
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            for v in &mut w {
                *v /= total;
            }
        } else {
            w = vec![1.0 / n as f64; n];
        }
    }
    w
}

/// Minimizer of the quadratic model over the free variables with the bound
/// variables held fixed. Returns the step and the equality multiplier (zero
/// without the sum constraint). Singular systems get the minimum-norm step.
fn equality_step(q: &DMatrix<f64>, grad: &[f64], free: &[usize], simplex: bool) -> (Vec<f64>, f64) {
    let n = grad.len();
    let k = free.len();
    let mut step = vec![0.0; n];
    if k == 0 {
        return (step, 0.0);
    }
    let dim = if simplex { k + 1 } else { k };
    let mut kkt = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    for (a, &i) in free.iter().enumerate() {
        for (b, &j) in free.iter().enumerate() {
            kkt[(a, b)] = q[(i, j)];
        }
        rhs[a] = -grad[i];
        if simplex {
            kkt[(a, k)] = 1.0;
            kkt[(k, a)] = 1.0;
        }
    }
    let svd = kkt.svd(true, true);
    let eps = svd.singular_values.max() * 1e-12;
    let sol = match svd.solve(&rhs, eps) {
        Ok(s) => s,
        Err(_) => return (step, 0.0),
    };
    for (a, &i) in free.iter().enumerate() {
        step[i] = sol[a];
    }
    // stationarity on the free set: Q p + g = -ν·1  →  multiplier ν = -sol[k]
    let nu = if simplex { -sol[k] } else { 0.0 };
    (step, nu)
}
