use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};

use super::panel::ErrorPanel;
use crate::data::time::target_time;
use crate::data::{Dataset, EngineConfig, Quantity};
use crate::error::{Error, ErrorKind, Result};
use crate::models::{run_forecast_day, ForecastBundle, ModelState, PRICE_MODELS};

/// An extra price forecaster scored alongside the engine's models, e.g. an
/// oracle or an external baseline. It sees the full dataset, so it is not
/// subject to the leakage guard.
pub trait PriceModel: Sync {
    fn name(&self) -> &str;
    fn forecast(&self, data: &Dataset, issue_date: NaiveDate, horizon_hours: usize) -> Result<Vec<f64>>;
}

/// Forecasts the realized price; scores zero error wherever a price exists.
pub struct PerfectForesight;

impl PriceModel for PerfectForesight {
    fn name(&self) -> &str {
        "perfect_foresight"
    }

    fn forecast(&self, data: &Dataset, issue_date: NaiveDate, horizon_hours: usize) -> Result<Vec<f64>> {
        Ok(realized_prices(data, issue_date, horizon_hours))
    }
}

/// Realized prices at the targets of `issue_date`, `NaN` where unavailable.
pub fn realized_prices(data: &Dataset, issue_date: NaiveDate, horizon_hours: usize) -> Vec<f64> {
    (1..=horizon_hours)
        .map(|h| {
            data.market
                .get(Quantity::Price, target_time(issue_date, h))
                .filter(|v| v.is_finite())
                .unwrap_or(f64::NAN)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayFailure {
    pub issue_date: NaiveDate,
    /// Inside the scored range (as opposed to warm-up).
    pub scored: bool,
    pub kind: ErrorKind,
    pub node: Option<String>,
    pub horizon_hour: Option<usize>,
    pub message: String,
}

impl DayFailure {
    fn new(issue_date: NaiveDate, scored: bool, err: &Error) -> Self {
        let (node, horizon_hour) = match err {
            Error::Node { node, horizon_hour, .. } => (Some(node.clone()), *horizon_hour),
            _ => (None, None),
        };
        DayFailure {
            issue_date,
            scored,
            kind: err.kind(),
            node,
            horizon_hour,
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BacktestRun {
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub panel: ErrorPanel,
    /// Bundles of the scored days that succeeded.
    pub bundles: Vec<ForecastBundle>,
    pub failures: Vec<DayFailure>,
    pub state: ModelState,
}

pub fn rolling_backtest(data: &Dataset, start: NaiveDate, end: NaiveDate, config: &EngineConfig) -> Result<BacktestRun> {
    rolling_backtest_with(data, start, end, config, &[])
}

/// Runs the engine day by day from `start − warmup_days` through `end`,
/// scoring the days in `[start, end]`. Warm-up days only build state.
/// A day that fails is recorded and left out of the panel.
pub fn rolling_backtest_with(
    data: &Dataset,
    start: NaiveDate,
    end: NaiveDate,
    config: &EngineConfig,
    extra: &[&dyn PriceModel],
) -> Result<BacktestRun> {
    if end < start {
        return Err(Error::Config(format!("end date {end} is before start date {start}")));
    }
    config.validate()?;
    let horizon = config.horizon_hours;
    let mut state = ModelState::new(horizon);
    let mut panel = ErrorPanel::new(horizon);
    let mut bundles = Vec::new();
    let mut failures = Vec::new();

    let mut day = start - Duration::days(config.warmup_days as i64);
    while day <= end {
        let scored = day >= start;
        let outcome = run_forecast_day(&mut state, data, day, config).and_then(|bundle| {
            if !scored {
                return Ok(None);
            }
            let mut forecasts: BTreeMap<String, Vec<f64>> = PRICE_MODELS
                .iter()
                .map(|&m| (m.to_string(), bundle.rows.iter().map(|r| r.price(m).unwrap()).collect()))
                .collect();
            for model in extra {
                let f = model.forecast(data, day, horizon)?;
                if f.len() != horizon {
                    return Err(Error::input(format!(
                        "model {} returned {} hours, expected {horizon}",
                        model.name(),
                        f.len()
                    )));
                }
                forecasts.insert(model.name().to_string(), f);
            }
            Ok(Some((bundle, forecasts)))
        });
        match outcome {
            Ok(Some((bundle, forecasts))) => {
                panel.push_day(day, realized_prices(data, day, horizon), &forecasts)?;
                bundles.push(bundle);
            }
            Ok(None) => {}
            Err(e) if e.kind() == ErrorKind::Usage => return Err(e),
            Err(e) => {
                if scored {
                    log::warn!("issue day {day} excluded from the panel: {e}");
                } else {
                    log::debug!("warm-up day {day} failed: {e}");
                }
                failures.push(DayFailure::new(day, scored, &e));
            }
        }
        day += Duration::days(1);
    }
    Ok(BacktestRun {
        start,
        end,
        panel,
        bundles,
        failures,
        state,
    })
}
