//! LEAR ensembles: five LASSO fits over a penalty grid, combined by a
//! simplex-constrained ensembler fitted on their realized performance.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::state::HistoryRecord;
use crate::data::{ColdStart, EngineConfig};
use crate::error::{Error, Result, Stage};
use crate::features::{apply_standardizer, fit_standardizer, Standardizer};
use crate::solvers::{fit_combination, fit_lasso_path, predict_combination, CombinationWeights, ConstraintMode, LassoFit};

/// The LASSO members of one horizon hour. Both features and target are
/// standardized on the training window; predictions are mapped back to
/// natural units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearMembers {
    pub columns: Vec<String>,
    pub standardizer: Standardizer,
    pub target_mean: f64,
    pub target_scale: f64,
    pub fits: Vec<LassoFit>,
}

impl LearMembers {
    pub fn forecasts(&self, row: &[f64]) -> Result<Vec<f64>> {
        let z = self.standardizer.transform_row(row)?;
        Ok(self
            .fits
            .iter()
            .map(|f| self.target_mean + self.target_scale * f.predict(&z))
            .collect())
    }
}

/// Fits one LASSO per penalty on the most recent `config.lear_window` rows
/// of `x` (oldest first).
pub fn fit_lear_members(x: &DMatrix<f64>, y: &[f64], columns: Vec<String>, config: &EngineConfig) -> Result<LearMembers> {
    let window = config.lear_window;
    if x.nrows() != y.len() {
        return Err(Error::input(format!("{} rows but {} targets", x.nrows(), y.len())));
    }
    if x.ncols() != columns.len() {
        return Err(Error::input(format!("{} columns but {} names", x.ncols(), columns.len())));
    }
    if x.nrows() < window {
        return Err(Error::training(
            Stage::Lasso,
            format!(
                "needs {window} training rows, found {} (short by {})",
                x.nrows(),
                window - x.nrows()
            ),
        ));
    }
    let skip = x.nrows() - window;
    let xw = x.rows(skip, window).into_owned();
    let yw = &y[skip..];

    let standardizer = fit_standardizer(&xw)?;
    let fm = apply_standardizer(&standardizer, &xw)?;
    let target_mean = yw.iter().sum::<f64>() / window as f64;
    let sd = (yw.iter().map(|v| (v - target_mean).powi(2)).sum::<f64>() / (window as f64 - 1.0)).sqrt();
    let target_scale = if sd > 1e-12 * target_mean.abs().max(1.0) { sd } else { 1.0 };
    let ys: Vec<f64> = yw.iter().map(|v| (v - target_mean) / target_scale).collect();

    let fits = if fm.values.ncols() == 0 {
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        config
            .lambdas
            .iter()
            .map(|&l| LassoFit {
                coefficients: Vec::new(),
                intercept: mean,
                penalty: l,
                n_iterations: 0,
                converged: true,
            })
            .collect()
    } else {
        fit_lasso_path(&fm.values, &ys, &config.lambdas, config.lasso_tol, config.lasso_max_iter)?
    };
    Ok(LearMembers {
        columns,
        standardizer,
        target_mean,
        target_scale,
        fits,
    })
}

/// Combination weights plus whether they are the cold-start fallback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsemblerFit {
    pub weights: CombinationWeights,
    pub fallback: bool,
}

/// Fits an ensembler on the last `window` records of `history`. With fewer
/// records the result depends on `cold_start`: equal weights, or an
/// ensembler-stage training error.
pub fn fit_ensembler(
    history: &[HistoryRecord],
    n_members: usize,
    window: usize,
    mode: ConstraintMode,
    cold_start: ColdStart,
) -> Result<EnsemblerFit> {
    if history.len() < window {
        return match cold_start {
            ColdStart::Fallback => Ok(EnsemblerFit {
                weights: CombinationWeights::uniform(n_members, mode),
                fallback: true,
            }),
            ColdStart::Strict => Err(Error::training(
                Stage::Ensembler,
                format!("needs {window} realized observations, found {}", history.len()),
            )),
        };
    }
    let recent = &history[history.len() - window..];
    if let Some(r) = recent.iter().find(|r| r.predictions.len() != n_members) {
        return Err(Error::input(format!(
            "history record of {} has {} members, expected {n_members}",
            r.issue_date,
            r.predictions.len()
        )));
    }
    let preds = DMatrix::from_fn(window, n_members, |i, j| recent[i].predictions[j]);
    let actuals: Vec<f64> = recent.iter().map(|r| r.actual).collect();
    let weights = fit_combination(&preds, &actuals, mode).map_err(|e| Error::training(Stage::Ensembler, e.to_string()))?;
    Ok(EnsemblerFit {
        weights,
        fallback: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearEnsemble {
    pub horizon_hour: usize,
    pub members: LearMembers,
    pub ensembler: EnsemblerFit,
}

/// LASSO stage on `x`/`y`, then the simplex ensembler on `history`.
pub fn train_lear_ensemble(
    x: &DMatrix<f64>,
    y: &[f64],
    columns: Vec<String>,
    history: &[HistoryRecord],
    horizon_hour: usize,
    config: &EngineConfig,
) -> Result<LearEnsemble> {
    let members = fit_lear_members(x, y, columns, config)?;
    let ensembler = fit_ensembler(
        history,
        members.fits.len(),
        config.ensemble_window,
        ConstraintMode::SimplexFixedSum,
        config.cold_start,
    )?;
    Ok(LearEnsemble {
        horizon_hour,
        members,
        ensembler,
    })
}

pub fn forecast_lear(model: &LearEnsemble, row: &[f64]) -> Result<f64> {
    let preds = model.members.forecasts(row)?;
    predict_combination(&model.ensembler.weights, &preds)
}
