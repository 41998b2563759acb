//! Read access to a [`Dataset`] as of a forecast cutoff.
//!
//! Model code only ever sees a `DataView`. Market values are visible when
//! their delivery hour starts before the cutoff; a weather value is visible
//! when its run was issued before the cutoff.

use chrono::{DateTime, NaiveDate, Utc};

use super::{time, Dataset, HourlySeries, Quantity, WeatherAttribute};

#[derive(Debug, Clone, Copy)]
pub struct DataView<'a> {
    data: &'a Dataset,
    cutoff: DateTime<Utc>,
}

impl<'a> DataView<'a> {
    pub fn new(data: &'a Dataset, cutoff: DateTime<Utc>) -> Self {
        DataView { data, cutoff }
    }

    pub fn for_issue_date(data: &'a Dataset, issue_date: NaiveDate) -> Self {
        Self::new(data, time::cutoff(issue_date))
    }

    pub fn cutoff(&self) -> DateTime<Utc> {
        self.cutoff
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.data
    }

    pub fn market(&self, q: Quantity, t: DateTime<Utc>) -> Option<f64> {
        if t >= self.cutoff {
            return None;
        }
        self.data.market.get(q, t)
    }

    pub fn residual_load(&self, t: DateTime<Utc>) -> Option<f64> {
        if t >= self.cutoff {
            return None;
        }
        self.data.market.residual_load(t)
    }

    /// The market column truncated to hours before the cutoff.
    pub fn series(&self, q: Quantity) -> HourlySeries {
        let m = &self.data.market;
        let visible = m.index_of(self.cutoff).unwrap_or(if self.cutoff <= m.start() { 0 } else { m.len() });
        HourlySeries::new(m.start(), m.column(q)[..visible].to_vec())
    }

    pub fn market_start(&self) -> DateTime<Utc> {
        self.data.market.start()
    }

    pub fn weather(
        &self,
        issue: DateTime<Utc>,
        lead: usize,
        loc: usize,
        attr: WeatherAttribute,
        max_fill: usize,
    ) -> Option<f64> {
        if issue >= self.cutoff {
            return None;
        }
        self.data.weather.value(issue, lead, loc, attr, max_fill)
    }

    pub fn has_weather_run(&self, issue: DateTime<Utc>) -> bool {
        issue < self.cutoff && self.data.weather.has_run(issue)
    }
}
