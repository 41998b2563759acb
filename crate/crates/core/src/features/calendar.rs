use std::collections::BTreeSet;

use chrono::{Datelike, NaiveDate};

pub const CALENDAR_COLUMNS: [&str; 8] = [
    "weekday_mon",
    "weekday_tue",
    "weekday_wed",
    "weekday_thu",
    "weekday_fri",
    "weekday_sat",
    "weekday_sun",
    "holiday",
];

/// Weekday and holiday dummies for one delivery date.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalendarFeatures {
    pub weekday: [f64; 7],
    pub holiday: f64,
}

impl CalendarFeatures {
    pub fn for_date(date: NaiveDate, holidays: &BTreeSet<NaiveDate>) -> Self {
        let mut weekday = [0.0; 7];
        weekday[date.weekday().num_days_from_monday() as usize] = 1.0;
        CalendarFeatures {
            weekday,
            holiday: if holidays.contains(&date) { 1.0 } else { 0.0 },
        }
    }

    pub fn values(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        out[..7].copy_from_slice(&self.weekday);
        out[7] = self.holiday;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_weekday_per_date() {
        let holidays: BTreeSet<_> = [NaiveDate::from_ymd_opt(2022, 12, 25).unwrap()].into();
        let mut d = NaiveDate::from_ymd_opt(2022, 12, 19).unwrap();
        for i in 0..14 {
            let c = CalendarFeatures::for_date(d, &holidays);
            assert_eq!(c.weekday.iter().sum::<f64>(), 1.0);
            assert_eq!(c.weekday[i % 7], 1.0);
            assert_eq!(c.holiday, if d.day() == 25 { 1.0 } else { 0.0 });
            d = d.succ_opt().unwrap();
        }
    }
}
