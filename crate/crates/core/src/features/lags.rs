use chrono::{DateTime, Duration, Utc};

use crate::data::HourlySeries;
use crate::error::{Error, Result};

/// Autoregressive features for delivery hour-of-day `hour` of a forecast
/// whose cutoff is `cutoff` (midnight UTC): the series at the same hour on
/// the issue date minus each lag in days. Every value read lies strictly
/// before the cutoff.
pub fn build_lagged_features(
    series: &HourlySeries,
    cutoff: DateTime<Utc>,
    hour: u32,
    lag_days: &[u32],
) -> Result<Vec<f64>> {
    if hour > 23 {
        return Err(Error::input(format!("hour of day must be below 24, got {hour}")));
    }
    lag_days
        .iter()
        .map(|&lag| {
            if lag == 0 {
                return Err(Error::input("lag of zero days would read past the cutoff"));
            }
            let t = cutoff - Duration::days(lag as i64) + Duration::hours(hour as i64);
            debug_assert!(t < cutoff);
            series.get(t).ok_or_else(|| {
                Error::input(format!(
                    "insufficient history: no value {lag} day(s) before the cutoff at hour {hour}"
                ))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn start() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2022, 1, 1, 0, 0, 0).unwrap()
    }

    #[test]
    fn constant_series() {
        let s = HourlySeries::new(start(), vec![7.5; 24 * 20]);
        let cutoff = start() + Duration::days(10);
        assert_eq!(build_lagged_features(&s, cutoff, 13, &[1, 2, 7]).unwrap(), vec![7.5; 3]);
    }

    #[test]
    fn day_index_ramp() {
        let values: Vec<f64> = (0..24 * 20).map(|i| (i / 24) as f64).collect();
        let s = HourlySeries::new(start(), values);
        let cutoff = start() + Duration::days(10);
        assert_eq!(build_lagged_features(&s, cutoff, 5, &[1, 2, 7]).unwrap(), vec![9.0, 8.0, 3.0]);
    }

    #[test]
    fn insufficient_history() {
        let s = HourlySeries::new(start(), vec![1.0; 24 * 5]);
        assert!(build_lagged_features(&s, start() + Duration::days(5), 0, &[7]).is_err());
        assert!(build_lagged_features(&s, start() + Duration::days(5), 0, &[0]).is_err());
    }

    #[test]
    fn values_at_or_after_cutoff_never_read() {
        let n = 24 * 20;
        let values: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let cutoff = start() + Duration::days(12);
        let base = build_lagged_features(&HourlySeries::new(start(), values.clone()), cutoff, 23, &[1, 2, 7]).unwrap();
        for k in (24 * 12)..n {
            let mut perturbed = values.clone();
            perturbed[k] += 1e3;
            let out = build_lagged_features(&HourlySeries::new(start(), perturbed), cutoff, 23, &[1, 2, 7]).unwrap();
            assert_eq!(out, base);
        }
    }
}
