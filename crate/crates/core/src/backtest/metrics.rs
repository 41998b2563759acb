//! Root mean squared error per horizon hour, raw and normalized by the
//! standard deviation of the actuals.

use serde::Serialize;

use super::panel::ErrorPanel;
use crate::error::{Error, Result};

pub fn rmse(errors: &[f64]) -> Option<f64> {
    if errors.is_empty() {
        return None;
    }
    Some((errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt())
}

/// Sample standard deviation (denominator `N − 1`).
pub fn sample_std(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    Some((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt())
}

/// RMSE over the standard deviation of the actuals; `None` when the actuals
/// do not vary.
pub fn nrmse(errors: &[f64], actuals: &[f64]) -> Option<f64> {
    let sd = sample_std(actuals)?;
    if sd == 0.0 {
        return None;
    }
    Some(rmse(errors)? / sd)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HourMetric {
    pub horizon_hour: usize,
    pub rmse: Option<f64>,
    pub nrmse: Option<f64>,
    pub n: usize,
}

fn need_two_days(panel: &ErrorPanel) -> Result<()> {
    if panel.len() < 2 {
        return Err(Error::input(format!(
            "metrics need at least 2 issue days, panel has {}",
            panel.len()
        )));
    }
    Ok(())
}

pub fn hour_metrics(panel: &ErrorPanel, model: &str) -> Result<Vec<HourMetric>> {
    need_two_days(panel)?;
    (1..=panel.horizon_hours)
        .map(|h| {
            let (e, a): (Vec<f64>, Vec<f64>) = panel.scored(model, h)?.into_iter().unzip();
            Ok(HourMetric {
                horizon_hour: h,
                rmse: rmse(&e),
                nrmse: nrmse(&e, &a),
                n: e.len(),
            })
        })
        .collect()
}

pub fn rmse_per_hour(panel: &ErrorPanel, model: &str) -> Result<Vec<Option<f64>>> {
    Ok(hour_metrics(panel, model)?.into_iter().map(|m| m.rmse).collect())
}

pub fn nrmse_per_hour(panel: &ErrorPanel, model: &str) -> Result<Vec<Option<f64>>> {
    Ok(hour_metrics(panel, model)?.into_iter().map(|m| m.nrmse).collect())
}
