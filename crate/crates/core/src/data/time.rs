//! Timestamp conventions. Everything is UTC; a forecast issued for date `d`
//! has its cutoff at `d 00:00 UTC`.

use chrono::{DateTime, Duration, NaiveDate, NaiveDateTime, Utc};

const FORMAT: &str = "%Y-%m-%dT%H:%M:%SZ";

pub fn format_utc(t: DateTime<Utc>) -> String {
    t.format(FORMAT).to_string()
}

/// Parses an RFC 3339 timestamp with a zero offset, or a naive
/// `YYYY-MM-DD[T ]HH:MM[:SS]` taken as UTC.
pub fn parse_utc(s: &str) -> Result<DateTime<Utc>, String> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        if t.offset().local_minus_utc() != 0 {
            return Err(format!(
                "timestamp {s} carries offset {}; timestamps must be UTC",
                t.offset()
            ));
        }
        return Ok(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.and_utc());
        }
    }
    Err(format!("unparseable timestamp {s:?}"))
}

pub fn cutoff(issue_date: NaiveDate) -> DateTime<Utc> {
    issue_date.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc()
}

/// Delivery hour targeted by horizon hour `h` (1-based) of a forecast.
pub fn target_time(issue_date: NaiveDate, horizon_hour: usize) -> DateTime<Utc> {
    cutoff(issue_date) + Duration::hours(horizon_hour as i64 - 1)
}

/// Weather run used by a forecast: issued one hour before the cutoff.
pub fn weather_issue_time(issue_date: NaiveDate) -> DateTime<Utc> {
    cutoff(issue_date) - Duration::hours(1)
}
