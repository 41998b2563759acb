//! LASSO regression by cyclic coordinate descent.
//!
//! Minimizes `(1/M)‖Xβ + b − y‖² + λ‖β‖₁` with an unpenalized intercept `b`.
//! The solver works on the covariance (Gram) form of the problem so that a
//! whole regularization path can reuse one `XᵀX` product.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoFit {
    /// One weight per column of the training matrix.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub penalty: f64,
    pub n_iterations: usize,
    /// `false` when `max_iter` sweeps ran without meeting the tolerance.
    pub converged: bool,
}

impl LassoFit {
    pub fn predict(&self, row: &[f64]) -> f64 {
        debug_assert_eq!(row.len(), self.coefficients.len());
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(row)
                .map(|(b, x)| b * x)
                .sum::<f64>()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coefficients.iter().map(|b| b.abs()).sum()
    }
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Centered second-moment form of a regression problem.
struct Gram {
    gram: DMatrix<f64>,
    xty: DVector<f64>,
    x_mean: Vec<f64>,
    y_mean: f64,
}

impl Gram {
    fn new(x: &DMatrix<f64>, y: &[f64]) -> Result<Self> {
        let (m, p) = x.shape();
        if m == 0 || p == 0 {
            return Err(Error::input(format!(
                "LASSO needs at least one row and one column, got {m}x{p}"
            )));
        }
        if y.len() != m {
            return Err(Error::input(format!(
                "target length {} does not match {} rows",
                y.len(),
                m
            )));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite value in LASSO inputs"));
        }

        let mf = m as f64;
        let x_mean: Vec<f64> = x.column_iter().map(|c| c.sum() / mf).collect();
        let y_mean = y.iter().sum::<f64>() / mf;
        let mut xc = x.clone();
        for (j, mut col) in xc.column_iter_mut().enumerate() {
            col.add_scalar_mut(-x_mean[j]);
        }
        let yc = DVector::from_iterator(m, y.iter().map(|v| v - y_mean));
        let gram = xc.tr_mul(&xc) / mf;
        let xty = xc.tr_mul(&yc) / mf;
        Ok(Gram {
            gram,
            xty,
            x_mean,
            y_mean,
        })
    }

    fn solve(&self, lambda: f64, warm: Option<&[f64]>, tol: f64, max_iter: usize) -> LassoFit {
        let p = self.xty.len();
        let mut beta = warm.map_or_else(|| vec![0.0; p], |w| w.to_vec());
        // q = G β, kept in sync with every coordinate update
        let mut q: Vec<f64> = (0..p)
            .map(|k| (0..p).map(|j| self.gram[(k, j)] * beta[j]).sum())
            .collect();
        let half = 0.5 * lambda;

        let mut converged = false;
        let mut n_iterations = 0;
        for iter in 1..=max_iter {
            n_iterations = iter;
            let mut max_delta = 0.0_f64;
            for j in 0..p {
                let gjj = self.gram[(j, j)];
                if gjj <= 0.0 {
                    continue;
                }
                let old = beta[j];
                let rho = self.xty[j] - (q[j] - gjj * old);
                let new = soft_threshold(rho, half) / gjj;
                if new != old {
                    let delta = new - old;
                    beta[j] = new;
                    for (k, qk) in q.iter_mut().enumerate() {
                        *qk += self.gram[(k, j)] * delta;
                    }
                    max_delta = max_delta.max(delta.abs());
                }
            }
            if max_delta < tol {
                converged = true;
                break;
            }
        }

        let intercept = self.y_mean
            - self
                .x_mean
                .iter()
                .zip(&beta)
                .map(|(m, b)| m * b)
                .sum::<f64>();
        LassoFit {
            coefficients: beta,
            intercept,
            penalty: lambda,
            n_iterations,
            converged,
        }
    }
}

fn check_penalty(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::input(format!("LASSO penalty must be positive, got {lambda}")));
    }
    Ok(())
}

/// Fits a single LASSO model starting from the zero vector.
///
/// Columns are expected to be standardized by the caller. Running out of
/// iterations is reported through [`LassoFit::converged`], not as an error.
pub fn fit_lasso(
    x: &DMatrix<f64>,
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LassoFit> {
    check_penalty(lambda)?;
    let gram = Gram::new(x, y)?;
    Ok(gram.solve(lambda, None, tol, max_iter))
}

/// Fits one model per penalty, sharing the Gram matrix and warm-starting
/// each fit from the next larger penalty. Results follow the order of
/// `lambdas`.
pub fn fit_lasso_path(
    x: &DMatrix<f64>,
    y: &[f64],
    lambdas: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<LassoFit>> {
    for &l in lambdas {
        check_penalty(l)?;
    }
    let gram = Gram::new(x, y)?;
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]));

    let mut fits: Vec<Option<LassoFit>> = vec![None; lambdas.len()];
    let mut warm: Option<Vec<f64>> = None;
    for idx in order {
        let fit = gram.solve(lambdas[idx], warm.as_deref(), tol, max_iter);
        warm = Some(fit.coefficients.clone());
        fits[idx] = Some(fit);
    }
    Ok(fits.into_iter().map(|f| f.expect("every penalty fitted")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn standardized(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0));
        for mut col in x.column_iter_mut() {
            let mean = col.sum() / rows as f64;
            col.add_scalar_mut(-mean);
            let sd = (col.norm_squared() / (rows as f64 - 1.0)).sqrt();
            col /= sd;
        }
        x
    }

    /// Largest violation of the subgradient optimality conditions.
    fn kkt_violation(x: &DMatrix<f64>, y: &[f64], fit: &LassoFit) -> f64 {
        let m = x.nrows() as f64;
        let beta = DVector::from_column_slice(&fit.coefficients);
        let resid = x * &beta - DVector::from_column_slice(y)
            + DVector::from_element(x.nrows(), fit.intercept);
        let grad = x.tr_mul(&resid) * (2.0 / m);
        grad.iter()
            .zip(&fit.coefficients)
            .map(|(&g, &b)| {
                if b == 0.0 {
                    (g.abs() - fit.penalty).max(0.0)
                } else {
                    (g + fit.penalty * b.signum()).abs()
                }
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn huge_penalty_zeroes_everything() {
        let x = standardized(10, 2, 1);
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let fit = fit_lasso(&x, &y, 1e6, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(fit.coefficients.iter().all(|&b| b == 0.0));
        assert!((fit.intercept - 4.5).abs() < 1e-12);
    }

    #[test]
    fn perfect_predictor_recovers_unit_coefficient() {
        let x = standardized(30, 3, 2);
        let y: Vec<f64> = x.column(1).iter().copied().collect();
        let fit = fit_lasso(&x, &y, 1e-9, 1e-12, 100_000).unwrap();
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-6, "{:?}", fit.coefficients);
        assert!(fit.coefficients[0].abs() < 1e-6);
        assert!(fit.coefficients[2].abs() < 1e-6);
    }

    #[test]
    fn random_problem_satisfies_kkt() {
        let x = standardized(12, 4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y: Vec<f64> = (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let fit = fit_lasso(&x, &y, 0.1, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(fit.converged);
        assert!(kkt_violation(&x, &y, &fit) < 1e-6);
    }

    #[test]
    fn path_matches_individual_fits() {
        let x = standardized(40, 6, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let y: Vec<f64> = (0..40).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let lambdas = [0.01, 0.1, 1.0];
        let path = fit_lasso_path(&x, &y, &lambdas, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        for (fit, &l) in path.iter().zip(&lambdas) {
            assert_eq!(fit.penalty, l);
            assert!(kkt_violation(&x, &y, fit) < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = standardized(5, 2, 7);
        assert!(fit_lasso(&x, &[1.0; 4], 0.1, 1e-7, 10).is_err());
        assert!(fit_lasso(&x, &[1.0; 5], 0.0, 1e-7, 10).is_err());
        let mut bad = x.clone();
        bad[(0, 0)] = f64::NAN;
        assert!(fit_lasso(&bad, &[1.0; 5], 0.1, 1e-7, 10).is_err());
        assert!(fit_lasso(&DMatrix::zeros(0, 2), &[], 0.1, 1e-7, 10).is_err());
    }

    #[test]
    fn iteration_cap_is_not_an_error() {
        let x = standardized(50, 10, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y: Vec<f64> = (0..50).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let fit = fit_lasso(&x, &y, 0.01, 1e-15, 1).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.n_iterations, 1);
    }

    #[test]
    fn deterministic() {
        let x = standardized(25, 5, 10);
        let y: Vec<f64> = (0..25).map(|i| (i as f64).sin()).collect();
        let a = fit_lasso(&x, &y, 0.05, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let b = fit_lasso(&x, &y, 0.05, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(a, b);
    }

    mod props {
        use super::{fit_lasso, standardized, ChaCha8Rng};
        use proptest::prelude::*;
        use rand::{Rng, SeedableRng};

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn larger_penalty_never_grows_l1(seed in 0u64..10_000, l1 in 0.01f64..0.5, factor in 1.0f64..5.0) {
                let x = standardized(30, 5, seed);
                let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
                let y: Vec<f64> = (0..30).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let small = fit_lasso(&x, &y, l1, 1e-10, 100_000).unwrap();
                let large = fit_lasso(&x, &y, l1 * factor, 1e-10, 100_000).unwrap();
                prop_assert!(large.l1_norm() <= small.l1_norm() + 1e-9);
            }
        }
    }
}
