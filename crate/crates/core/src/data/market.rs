//! Hourly market panel: day-ahead price and system-wide quantities.

use std::fmt;
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::series::HourlySeries;
use super::time::{format_utc, parse_utc};
use crate::error::{Error, Result};

pub const MARKET_HEADER: [&str; 7] = [
    "timestamp_utc",
    "price_eur_mwh",
    "load_mw",
    "pv_mw",
    "wind_on_mw",
    "wind_off_mw",
    "net_imports_mw",
];

/// Columns of the market panel. Net imports are positive when power flows
/// into the domestic zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quantity {
    Price,
    Load,
    Pv,
    WindOnshore,
    WindOffshore,
    NetImports,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::Price,
        Quantity::Load,
        Quantity::Pv,
        Quantity::WindOnshore,
        Quantity::WindOffshore,
        Quantity::NetImports,
    ];

    /// The quantities that make up residual load, in bundle order.
    pub const DRIVERS: [Quantity; 5] = [
        Quantity::Pv,
        Quantity::WindOnshore,
        Quantity::WindOffshore,
        Quantity::Load,
        Quantity::NetImports,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Quantity::Price => "price",
            Quantity::Load => "load",
            Quantity::Pv => "pv",
            Quantity::WindOnshore => "wind_on",
            Quantity::WindOffshore => "wind_off",
            Quantity::NetImports => "net_imports",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketPanel {
    start: DateTime<Utc>,
    columns: [Vec<f64>; 6],
}

impl MarketPanel {
    /// Builds a panel from equal-length columns ordered as [`Quantity::ALL`].
    pub fn new(start: DateTime<Utc>, columns: [Vec<f64>; 6]) -> Result<Self> {
        let len = columns[0].len();
        if columns.iter().any(|c| c.len() != len) {
            return Err(Error::input("market columns differ in length"));
        }
        if columns.iter().flatten().any(|v| v.is_infinite()) {
            return Err(Error::input("market panel contains infinite values"));
        }
        Ok(MarketPanel { start, columns })
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn end(&self) -> DateTime<Utc> {
        self.start + Duration::hours(self.len() as i64)
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, q: Quantity) -> &[f64] {
        &self.columns[q.index()]
    }

    pub fn column_mut(&mut self, q: Quantity) -> &mut [f64] {
        &mut self.columns[q.index()]
    }

    pub fn index_of(&self, t: DateTime<Utc>) -> Option<usize> {
        let d = t - self.start;
        let h = d.num_hours();
        if d != Duration::hours(h) || h < 0 || h as usize >= self.len() {
            return None;
        }
        Some(h as usize)
    }

    pub fn get(&self, q: Quantity, t: DateTime<Utc>) -> Option<f64> {
        self.index_of(t)
            .map(|i| self.columns[q.index()][i])
            .filter(|v| !v.is_nan())
    }

    /// Load minus renewables minus net imports at `t`, if all five are present.
    pub fn residual_load(&self, t: DateTime<Utc>) -> Option<f64> {
        let i = self.index_of(t)?;
        let v = |q: Quantity| self.columns[q.index()][i];
        let rl = v(Quantity::Load)
            - v(Quantity::Pv)
            - v(Quantity::WindOnshore)
            - v(Quantity::WindOffshore)
            - v(Quantity::NetImports);
        (!rl.is_nan()).then_some(rl)
    }

    pub fn series(&self, q: Quantity) -> HourlySeries {
        HourlySeries::new(self.start, self.columns[q.index()].clone())
    }

    pub fn timestamp(&self, index: usize) -> DateTime<Utc> {
        self.start + Duration::hours(index as i64)
    }
}

fn parse_cell(path: &Path, line: usize, name: &str, cell: &str) -> Result<f64> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(f64::NAN);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("column {name}: non-numeric value {cell:?}"),
        }),
    }
}

pub(crate) fn check_header(path: &Path, found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = found.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("header mismatch: expected {}, found {}", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

/// Reads a market CSV. Empty cells are missing values; timestamps must be
/// contiguous UTC hours.
pub fn load_market_csv(path: impl AsRef<Path>) -> Result<MarketPanel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_market(path, file)
}

pub(crate) fn read_market<R: std::io::Read>(path: &Path, reader: R) -> Result<MarketPanel> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(path, 1, e))?.clone();
    check_header(path, &headers, &MARKET_HEADER)?;

    let mut start: Option<DateTime<Utc>> = None;
    let mut prev: Option<DateTime<Utc>> = None;
    let mut columns: [Vec<f64>; 6] = Default::default();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            csv_error(path, line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let t = parse_utc(&record[0]).map_err(parse_err)?;
        if let Some(p) = prev {
            let step = (t - p).num_minutes();
            if step == 0 {
                return Err(parse_err(format!(
                    "duplicate timestamp {}; timestamps must be unique UTC hours",
                    format_utc(t)
                )));
            }
            if step < 0 {
                return Err(parse_err(format!(
                    "timestamp {} is earlier than the previous row",
                    format_utc(t)
                )));
            }
            if step != 60 {
                return Err(parse_err(format!(
                    "jump of {step} minutes after {}; timestamps must be contiguous UTC hours \
                     (local-time exports skip or repeat an hour at daylight-saving transitions)",
                    format_utc(p)
                )));
            }
        } else {
            start = Some(t);
        }
        prev = Some(t);
        for (k, col) in columns.iter_mut().enumerate() {
            col.push(parse_cell(path, line, MARKET_HEADER[k + 1], &record[k + 1])?);
        }
    }
    let start = start.ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: "no data rows".into(),
    })?;
    MarketPanel::new(start, columns)
}

pub(crate) fn csv_error(path: &Path, line: usize, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

pub fn write_market_csv(panel: &MarketPanel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, 0, e))?;
    w.write_record(MARKET_HEADER).map_err(|e| csv_error(path, 0, e))?;
    for i in 0..panel.len() {
        let mut row = vec![format_utc(panel.timestamp(i))];
        row.extend(Quantity::ALL.iter().map(|&q| fmt_value(panel.column(q)[i])));
        w.write_record(&row).map_err(|e| csv_error(path, 0, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
