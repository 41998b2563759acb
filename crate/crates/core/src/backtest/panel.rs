use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Signed forecast errors (forecast − actual) per model, issue day and
/// horizon hour, with the actuals they were scored against. `NaN` marks an
/// hour without a realized price or without a forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPanel {
    pub horizon_hours: usize,
    pub dates: Vec<NaiveDate>,
    /// `[day][h − 1]`.
    pub actuals: Vec<Vec<f64>>,
    /// Per model, `[day][h − 1]`.
    pub errors: BTreeMap<String, Vec<Vec<f64>>>,
}

impl ErrorPanel {
    pub fn new(horizon_hours: usize) -> Self {
        ErrorPanel {
            horizon_hours,
            dates: Vec::new(),
            actuals: Vec::new(),
            errors: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn models(&self) -> impl Iterator<Item = &str> {
        self.errors.keys().map(String::as_str)
    }

    /// Adds one issue day. Every model already in the panel must be present,
    /// and days must be added in increasing order.
    pub fn push_day(&mut self, date: NaiveDate, actuals: Vec<f64>, forecasts: &BTreeMap<String, Vec<f64>>) -> Result<()> {
        if self.dates.last().is_some_and(|&d| d >= date) {
            return Err(Error::input(format!("issue day {date} added out of order")));
        }
        if actuals.len() != self.horizon_hours || forecasts.values().any(|f| f.len() != self.horizon_hours) {
            return Err(Error::input(format!("day {date} does not cover {} hours", self.horizon_hours)));
        }
        if !self.dates.is_empty() && (forecasts.len() != self.errors.len() || forecasts.keys().any(|k| !self.errors.contains_key(k))) {
            return Err(Error::input(format!("day {date} has a different model set")));
        }
        for (model, f) in forecasts {
            let e = f.iter().zip(&actuals).map(|(f, a)| f - a).collect();
            self.errors.entry(model.clone()).or_default().push(e);
        }
        self.dates.push(date);
        self.actuals.push(actuals);
        Ok(())
    }

    fn column(&self, model: &str) -> Result<&Vec<Vec<f64>>> {
        self.errors
            .get(model)
            .ok_or_else(|| Error::input(format!("model {model} is not in the panel")))
    }

    fn check_hour(&self, h: usize) -> Result<()> {
        if h == 0 || h > self.horizon_hours {
            return Err(Error::input(format!("horizon hour {h} outside 1..={}", self.horizon_hours)));
        }
        Ok(())
    }

    /// (error, actual) pairs of `model` at hour `h` on days where both are
    /// finite.
    pub fn scored(&self, model: &str, h: usize) -> Result<Vec<(f64, f64)>> {
        self.check_hour(h)?;
        let col = self.column(model)?;
        Ok(col
            .iter()
            .zip(&self.actuals)
            .map(|(e, a)| (e[h - 1], a[h - 1]))
            .filter(|(e, a)| e.is_finite() && a.is_finite())
            .collect())
    }

    /// Errors of two models at hour `h`, on the issue days where both exist.
    pub fn paired(&self, model_a: &str, model_b: &str, h: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_hour(h)?;
        let a = self.column(model_a)?;
        let b = self.column(model_b)?;
        Ok(a.iter()
            .zip(b)
            .map(|(x, y)| (x[h - 1], y[h - 1]))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .unzip())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(n: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2023, 1, n).unwrap()
    }

    #[test]
    fn pairing_and_ordering() {
        let mut p = ErrorPanel::new(2);
        let f = |a: f64, b: f64| BTreeMap::from([("a".to_string(), vec![a, a]), ("b".to_string(), vec![b, f64::NAN])]);
        p.push_day(day(1), vec![1.0, 2.0], &f(2.0, 3.0)).unwrap();
        p.push_day(day(2), vec![1.0, f64::NAN], &f(0.0, 1.0)).unwrap();
        assert!(p.push_day(day(2), vec![1.0, 1.0], &f(0.0, 1.0)).is_err());
        assert_eq!(p.scored("a", 1).unwrap(), vec![(1.0, 1.0), (-1.0, 1.0)]);
        assert_eq!(p.scored("a", 2).unwrap().len(), 1);
        assert_eq!(p.paired("a", "b", 1).unwrap(), (vec![1.0, -1.0], vec![2.0, 0.0]));
        assert_eq!(p.paired("a", "b", 2).unwrap().0.len(), 0);
        assert!(p.scored("c", 1).is_err());
        assert!(p.scored("a", 3).is_err());
        let other = BTreeMap::from([("z".to_string(), vec![0.0, 0.0])]);
        assert!(p.push_day(day(3), vec![0.0, 0.0], &other).is_err());
    }
}
