//! Structured price model: isotonic supply curves over realized
//! (residual load, price) pairs, with linearly decaying observation weights
//! over several window lengths, combined per horizon hour.

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::lear::{fit_ensembler, EnsemblerFit};
use super::state::HistoryRecord;
use crate::data::{DataView, EngineConfig, Quantity};
use crate::error::{Error, Result, Stage};
use crate::solvers::{fit_weighted_isotonic, predict_combination, ConstraintMode, SupplyCurve};

pub const HOURS_PER_WEEK: f64 = 168.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourlyPair {
    /// Start of the delivery hour.
    pub time: DateTime<Utc>,
    pub residual_load: f64,
    pub price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowCurve {
    pub weeks: u32,
    pub curve: SupplyCurve,
}

/// Age in hours of the delivery hour starting at `time`, measured from its
/// end to the cutoff. The last hour before the cutoff has age 0.
pub fn age_hours(time: DateTime<Utc>, cutoff: DateTime<Utc>) -> f64 {
    ((cutoff - time).num_minutes() as f64 / 60.0) - 1.0
}

/// `max(0, 1 − age / (W·168))`.
pub fn decay_weight(age: f64, weeks: u32) -> f64 {
    (1.0 - age / (weeks as f64 * HOURS_PER_WEEK)).max(0.0)
}

/// Realized pairs for the `weeks` hours before the view's cutoff.
pub fn hourly_pairs(view: &DataView<'_>, weeks: u32) -> Vec<HourlyPair> {
    let c = view.cutoff();
    let n = weeks as i64 * 168;
    (1..=n)
        .rev()
        .filter_map(|k| {
            let t = c - Duration::hours(k);
            Some(HourlyPair {
                time: t,
                residual_load: view.residual_load(t)?,
                price: view.market(Quantity::Price, t)?,
            })
        })
        .collect()
}

pub fn fit_supply_curves(pairs: &[HourlyPair], cutoff: DateTime<Utc>, decay_weeks: &[u32]) -> Result<Vec<WindowCurve>> {
    if let Some(p) = pairs.iter().find(|p| p.time >= cutoff) {
        return Err(Error::input(format!("pair at {} is not before the cutoff", p.time)));
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.residual_load).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.price).collect();
    let ages: Vec<f64> = pairs.iter().map(|p| age_hours(p.time, cutoff)).collect();
    decay_weeks
        .iter()
        .map(|&weeks| {
            let k: Vec<f64> = ages.iter().map(|&a| decay_weight(a, weeks)).collect();
            if !k.iter().any(|&w| w > 0.0) {
                return Err(Error::training(
                    Stage::Isotonic,
                    format!("no observations inside the {weeks}-week window"),
                ));
            }
            let curve = fit_weighted_isotonic(&x, &y, &k).map_err(|e| Error::training(Stage::Isotonic, e.to_string()))?;
            Ok(WindowCurve { weeks, curve })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredModel {
    pub curves: Vec<WindowCurve>,
    /// Non-negative ensembler per horizon hour (index h − 1).
    pub hours: Vec<EnsemblerFit>,
}

impl StructuredModel {
    pub fn curve_outputs(&self, residual_load: f64) -> Vec<f64> {
        self.curves.iter().map(|c| c.curve.eval(residual_load)).collect()
    }
}

/// Fits the supply curves on `pairs` and one ensembler per horizon hour on
/// `histories[h − 1]`. At least one week of history must precede the cutoff.
pub fn train_structured(
    pairs: &[HourlyPair],
    cutoff: DateTime<Utc>,
    histories: &[&[HistoryRecord]],
    config: &EngineConfig,
) -> Result<StructuredModel> {
    let shortest = config.decay_weeks.iter().copied().min().unwrap_or(1) as i64;
    let first = pairs.iter().map(|p| p.time).min();
    if first.map_or(true, |t| t > cutoff - Duration::hours(shortest * 168)) {
        return Err(Error::training(
            Stage::Isotonic,
            format!(
                "needs {} hours of residual-load and price history before the cutoff, found {}",
                shortest * 168,
                first.map_or(0, |t| (cutoff - t).num_hours())
            ),
        ));
    }
    let curves = fit_supply_curves(pairs, cutoff, &config.decay_weeks)?;
    let hours = histories
        .iter()
        .map(|h| {
            fit_ensembler(
                h,
                curves.len(),
                config.ensemble_window,
                ConstraintMode::NonNegativeOnly,
                config.cold_start,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StructuredModel { curves, hours })
}

pub fn forecast_structured(model: &StructuredModel, residual_load: f64, horizon_hour: usize) -> Result<f64> {
    if horizon_hour == 0 || horizon_hour > model.hours.len() {
        return Err(Error::input(format!("structured model has no ensembler for hour {horizon_hour}")));
    }
    predict_combination(&model.hours[horizon_hour - 1].weights, &model.curve_outputs(residual_load))
}
