use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

/// Contiguous hourly observations of one quantity. `NaN` marks a missing
/// value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlySeries {
    pub start: DateTime<Utc>,
    pub values: Vec<f64>,
}

impl HourlySeries {
    pub fn new(start: DateTime<Utc>, values: Vec<f64>) -> Self {
        HourlySeries { start, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Exclusive end timestamp.
    pub fn end(&self) -> DateTime<Utc> {
        self.start + Duration::hours(self.values.len() as i64)
    }

    pub fn index_of(&self, t: DateTime<Utc>) -> Option<usize> {
        let offset = (t - self.start).num_hours();
        if (t - self.start) != Duration::hours(offset) {
            return None;
        }
        usize::try_from(offset).ok().filter(|&i| i < self.values.len())
    }

    /// Value at `t`, or `None` when out of range or missing.
    pub fn get(&self, t: DateTime<Utc>) -> Option<f64> {
        self.index_of(t)
            .map(|i| self.values[i])
            .filter(|v| !v.is_nan())
    }

    pub fn timestamp(&self, index: usize) -> DateTime<Utc> {
        self.start + Duration::hours(index as i64)
    }
}
