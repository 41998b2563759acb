//! Feature rows for one (issue day, horizon hour) pair.

use std::collections::BTreeSet;

use chrono::{Duration, NaiveDate};
use nalgebra::DMatrix;

use crate::data::time::{cutoff, target_time, weather_issue_time};
use crate::data::{DataView, EngineConfig, HourlySeries, Quantity, Site, WeatherAttribute};
use crate::error::{Error, Result};
use crate::features::{
    apply_power_curve, build_lagged_features, log_profile_transform, select_inputs, CalendarFeatures,
    FeatureColumn, FeatureSource, PowerCurveTable, Target,
};

#[derive(Debug, Clone)]
enum Resolved {
    Weather { loc: usize, attr: WeatherAttribute },
    WindCf { loc: usize, z0: f64, hub: f64, site: Site },
    Weekday(usize),
    Holiday,
    Lag { quantity: Quantity, days: u32 },
    QuantityInput(usize),
}

/// The column spec of one target, resolved against the weather registry.
#[derive(Debug, Clone)]
pub struct ColumnSpec {
    pub target: Target,
    pub columns: Vec<FeatureColumn>,
    resolved: Vec<Resolved>,
}

impl ColumnSpec {
    pub fn new(target: Target, view: &DataView<'_>, config: &EngineConfig) -> Result<Self> {
        let panel = &view.dataset().weather;
        let columns = select_inputs(target, panel, &config.lag_days)?;
        let resolved = columns
            .iter()
            .map(|c| {
                let loc_of = |id: &str| {
                    panel
                        .location_index(id)
                        .ok_or_else(|| Error::input(format!("unknown location {id}")))
                };
                Ok(match &c.source {
                    FeatureSource::Weather { location, attribute } => Resolved::Weather {
                        loc: loc_of(location)?,
                        attr: *attribute,
                    },
                    FeatureSource::WindCapacityFactor { location } => {
                        let loc = loc_of(location)?;
                        let l = &panel.locations()[loc];
                        let hub = l.hub_height_m.unwrap_or(match l.site {
                            Site::Onshore => config.hub_height_onshore_m,
                            Site::Offshore => config.hub_height_offshore_m,
                        });
                        Resolved::WindCf {
                            loc,
                            z0: l.roughness_length_m,
                            hub,
                            site: l.site,
                        }
                    }
                    FeatureSource::Weekday(i) => Resolved::Weekday(*i as usize),
                    FeatureSource::Holiday => Resolved::Holiday,
                    FeatureSource::Lag { quantity, days } => Resolved::Lag {
                        quantity: *quantity,
                        days: *days,
                    },
                    FeatureSource::QuantityInput(q) => Resolved::QuantityInput(
                        Quantity::DRIVERS.iter().position(|d| d == q).expect("driver quantity"),
                    ),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ColumnSpec {
            target,
            columns,
            resolved,
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Builds feature rows from a [`DataView`]. Lag inputs read from market
/// series truncated at the view's cutoff.
pub struct RowBuilder<'a> {
    view: DataView<'a>,
    series: Vec<HourlySeries>,
    holidays: BTreeSet<NaiveDate>,
    max_fill: usize,
    onshore: &'a PowerCurveTable,
    offshore: &'a PowerCurveTable,
}

/// Outcome of assembling one row.
pub enum Row {
    Ready(Vec<f64>),
    /// An input is missing; carries the column name.
    Missing(String),
}

impl<'a> RowBuilder<'a> {
    pub fn new(view: DataView<'a>, config: &EngineConfig) -> Self {
        let ds = view.dataset();
        RowBuilder {
            series: Quantity::ALL.iter().map(|&q| view.series(q)).collect(),
            view,
            holidays: config.holiday_set(),
            max_fill: config.max_forward_fill_hours,
            onshore: &ds.onshore_curve,
            offshore: &ds.offshore_curve,
        }
    }

    pub fn view(&self) -> &DataView<'a> {
        &self.view
    }

    /// Inputs for issue day `t` at horizon hour `h`. `quantities` supplies
    /// the driver inputs of the semi-structured model in
    /// [`Quantity::DRIVERS`] order; without it the realized values are used.
    pub fn row(&self, spec: &ColumnSpec, t: NaiveDate, h: usize, quantities: Option<&[f64; 5]>) -> Result<Row> {
        let issue = weather_issue_time(t);
        let target = target_time(t, h);
        let hour = ((h - 1) % 24) as u32;
        let calendar = CalendarFeatures::for_date(target.date_naive(), &self.holidays).values();
        let mut out = Vec::with_capacity(spec.resolved.len());
        for (r, col) in spec.resolved.iter().zip(&spec.columns) {
            let v = match *r {
                Resolved::Weather { loc, attr } => self.view.weather(issue, h, loc, attr, self.max_fill),
                Resolved::WindCf { loc, z0, hub, site } => {
                    match self
                        .view
                        .weather(issue, h, loc, WeatherAttribute::WindSpeed10m, self.max_fill)
                    {
                        Some(v10) => {
                            let curve = if site == Site::Onshore { self.onshore } else { self.offshore };
                            Some(apply_power_curve(log_profile_transform(v10, z0, hub)?, curve)?)
                        }
                        None => None,
                    }
                }
                Resolved::Weekday(i) => Some(calendar[i]),
                Resolved::Holiday => Some(calendar[7]),
                Resolved::Lag { quantity, days } => {
                    build_lagged_features(&self.series[quantity.index()], cutoff(t), hour, &[days])
                        .ok()
                        .map(|v| v[0])
                }
                Resolved::QuantityInput(i) => match quantities {
                    Some(q) => Some(q[i]),
                    None => self.view.market(Quantity::DRIVERS[i], target),
                },
            };
            match v {
                Some(v) if v.is_finite() => out.push(v),
                _ => return Ok(Row::Missing(col.name.clone())),
            }
        }
        Ok(Row::Ready(out))
    }

    /// The most recent `max_rows` complete training rows for horizon hour
    /// `h` of a forecast issued on `issue_date`, oldest first. Only issue
    /// days whose target hour lies before the cutoff are considered.
    pub fn training_rows(
        &self,
        spec: &ColumnSpec,
        issue_date: NaiveDate,
        h: usize,
        max_rows: usize,
    ) -> Result<TrainingSet> {
        let quantity = spec.target.quantity();
        let max_lag = spec
            .resolved
            .iter()
            .filter_map(|r| match r {
                Resolved::Lag { days, .. } => Some(*days as i64),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        let earliest = self.view.market_start().date_naive() + Duration::days(max_lag);
        let mut t = issue_date - Duration::days(1 + ((h - 1) / 24) as i64);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut y = Vec::new();
        let mut dates = Vec::new();
        while rows.len() < max_rows && t >= earliest {
            let target = target_time(t, h);
            debug_assert!(target < self.view.cutoff());
            if let Some(actual) = self.view.market(quantity, target) {
                if let Row::Ready(r) = self.row(spec, t, h, None)? {
                    rows.push(r);
                    y.push(actual);
                    dates.push(t);
                }
            }
            t -= Duration::days(1);
        }
        rows.reverse();
        y.reverse();
        dates.reverse();
        let x = DMatrix::from_fn(rows.len(), spec.len(), |i, j| rows[i][j]);
        Ok(TrainingSet { x, y, dates })
    }
}

#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
    pub dates: Vec<NaiveDate>,
}
