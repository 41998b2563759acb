//! Weather forecast runs per location and the location registry.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::market::{check_header, csv_error};
use super::time::{format_utc, parse_utc};
use crate::error::{Error, Result};

pub const WEATHER_HEADER: [&str; 7] = [
    "timestamp_utc",
    "lead_hours",
    "location_id",
    "irradiation_wm2",
    "cloud_cover",
    "wind_speed_10m_ms",
    "temperature_c",
];

pub const LOCATION_HEADER: [&str; 6] = ["id", "lat", "lon", "z0_m", "region", "hub_height_m"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum WeatherAttribute {
    Irradiation,
    CloudCover,
    WindSpeed10m,
    Temperature,
}

impl WeatherAttribute {
    pub const ALL: [WeatherAttribute; 4] = [
        WeatherAttribute::Irradiation,
        WeatherAttribute::CloudCover,
        WeatherAttribute::WindSpeed10m,
        WeatherAttribute::Temperature,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            WeatherAttribute::Irradiation => "irradiation",
            WeatherAttribute::CloudCover => "cloud_cover",
            WeatherAttribute::WindSpeed10m => "wind_speed_10m",
            WeatherAttribute::Temperature => "temperature",
        }
    }
}

impl fmt::Display for WeatherAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Domestic,
    Europe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Site {
    Onshore,
    Offshore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub id: String,
    pub latitude: f64,
    pub longitude: f64,
    /// Surface roughness length in meters.
    pub roughness_length_m: f64,
    pub region: Region,
    /// Overrides the configured hub height for this location's site type.
    pub hub_height_m: Option<f64>,
    pub site: Site,
}

impl Location {
    pub fn validate(&self) -> Result<()> {
        if !(self.roughness_length_m > 0.0 && self.roughness_length_m < 10.0) {
            return Err(Error::input(format!(
                "location {}: roughness length must be in (0, 10) m, got {}",
                self.id, self.roughness_length_m
            )));
        }
        if let Some(h) = self.hub_height_m {
            if !(h > self.roughness_length_m) {
                return Err(Error::input(format!(
                    "location {}: hub height {h} m must exceed the roughness length",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// Reads `id,lat,lon,z0_m,region,hub_height_m[,site]`. `site` is `onshore`
/// (default) or `offshore`; an empty hub height falls back to configuration.
pub fn load_locations_csv(path: impl AsRef<Path>) -> Result<Vec<Location>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_locations(path, file)
}

pub(crate) fn read_locations<R: std::io::Read>(path: &Path, reader: R) -> Result<Vec<Location>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(path, 1, e))?.clone();
    let with_site = headers.len() == 7 && headers[6].trim() == "site";
    if with_site {
        let base: csv::StringRecord = headers.iter().take(6).collect();
        check_header(path, &base, &LOCATION_HEADER)?;
    } else {
        check_header(path, &headers, &LOCATION_HEADER)?;
    }

    let mut out: Vec<Location> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(path, 0, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        if record.len() != headers.len() {
            return Err(err(format!("expected {} fields, found {}", headers.len(), record.len())));
        }
        let num = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("column {}: non-numeric value {:?}", LOCATION_HEADER[i], &record[i])))
        };
        let region = match record[4].trim() {
            "domestic" => Region::Domestic,
            "europe" => Region::Europe,
            other => return Err(err(format!("unknown region {other:?} (expected domestic or europe)"))),
        };
        let hub_height_m = match record[5].trim() {
            "" => None,
            _ => Some(num(5)?),
        };
        let site = if with_site {
            match record[6].trim() {
                "" | "onshore" => Site::Onshore,
                "offshore" => Site::Offshore,
                other => return Err(err(format!("unknown site {other:?} (expected onshore or offshore)"))),
            }
        } else {
            Site::Onshore
        };
        let loc = Location {
            id: record[0].trim().to_string(),
            latitude: num(1)?,
            longitude: num(2)?,
            roughness_length_m: num(3)?,
            region,
            hub_height_m,
            site,
        };
        loc.validate().map_err(|e| err(e.to_string()))?;
        if out.iter().any(|l| l.id == loc.id) {
            return Err(err(format!("duplicate location id {}", loc.id)));
        }
        out.push(loc);
    }
    Ok(out)
}

pub fn write_locations_csv(locations: &[Location], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, 0, e))?;
    let mut header: Vec<&str> = LOCATION_HEADER.to_vec();
    header.push("site");
    w.write_record(&header).map_err(|e| csv_error(path, 0, e))?;
    for l in locations {
        w.write_record([
            l.id.clone(),
            l.latitude.to_string(),
            l.longitude.to_string(),
            l.roughness_length_m.to_string(),
            match l.region {
                Region::Domestic => "domestic".into(),
                Region::Europe => "europe".into(),
            },
            l.hub_height_m.map(|h| h.to_string()).unwrap_or_default(),
            match l.site {
                Site::Onshore => "onshore".into(),
                Site::Offshore => "offshore".into(),
            },
        ])
        .map_err(|e| csv_error(path, 0, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Numerical weather forecasts grouped by issue time. Each run holds leads
/// `1..=max_lead` for every location; `NaN` marks an explicitly missing cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherPanel {
    locations: Vec<Location>,
    max_lead: usize,
    runs: BTreeMap<DateTime<Utc>, Vec<f64>>,
}

impl WeatherPanel {
    pub fn new(locations: Vec<Location>, max_lead: usize) -> Result<Self> {
        if locations.is_empty() {
            return Err(Error::input("weather panel needs at least one location"));
        }
        if max_lead == 0 {
            return Err(Error::input("weather panel needs a positive maximum lead"));
        }
        for l in &locations {
            l.validate()?;
        }
        Ok(WeatherPanel {
            locations,
            max_lead,
            runs: BTreeMap::new(),
        })
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn location_index(&self, id: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.id == id)
    }

    pub fn max_lead(&self) -> usize {
        self.max_lead
    }

    fn run_len(&self) -> usize {
        self.max_lead * self.locations.len() * 4
    }

    fn offset(&self, lead: usize, loc: usize, attr: WeatherAttribute) -> usize {
        ((lead - 1) * self.locations.len() + loc) * 4 + attr.index()
    }

    pub fn issue_times(&self) -> impl Iterator<Item = DateTime<Utc>> + '_ {
        self.runs.keys().copied()
    }

    pub fn has_run(&self, issue: DateTime<Utc>) -> bool {
        self.runs.contains_key(&issue)
    }

    /// Adds a run from `values[lead-1][location][attribute]`, flattened.
    pub fn insert_run(&mut self, issue: DateTime<Utc>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.run_len() {
            return Err(Error::input(format!(
                "weather run for {} has {} values, expected {}",
                format_utc(issue),
                values.len(),
                self.run_len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            check_attribute(WeatherAttribute::ALL[i % 4], v).map_err(|m| {
                Error::input(format!("weather run {}: {m}", format_utc(issue)))
            })?;
        }
        self.runs.insert(issue, values);
        Ok(())
    }

    /// Raw cell; `None` for missing cells, unknown runs or out-of-range leads.
    pub fn raw(&self, issue: DateTime<Utc>, lead: usize, loc: usize, attr: WeatherAttribute) -> Option<f64> {
        if lead == 0 || lead > self.max_lead || loc >= self.locations.len() {
            return None;
        }
        let run = self.runs.get(&issue)?;
        let v = run[self.offset(lead, loc, attr)];
        (!v.is_nan()).then_some(v)
    }

    /// Cell with forward-filling from up to `max_fill` earlier leads of the
    /// same run.
    pub fn value(
        &self,
        issue: DateTime<Utc>,
        lead: usize,
        loc: usize,
        attr: WeatherAttribute,
        max_fill: usize,
    ) -> Option<f64> {
        let lowest = lead.saturating_sub(max_fill).max(1);
        (lowest..=lead)
            .rev()
            .find_map(|l| self.raw(issue, l, loc, attr))
    }

    pub fn set(&mut self, issue: DateTime<Utc>, lead: usize, loc: usize, attr: WeatherAttribute, v: f64) -> Result<()> {
        check_attribute(attr, v).map_err(Error::input)?;
        let off = self.offset(lead, loc, attr);
        let run = self
            .runs
            .get_mut(&issue)
            .ok_or_else(|| Error::input(format!("no weather run issued at {}", format_utc(issue))))?;
        run[off] = v;
        Ok(())
    }
}

fn check_attribute(attr: WeatherAttribute, v: f64) -> std::result::Result<(), String> {
    if v.is_nan() {
        return Ok(());
    }
    let ok = match attr {
        WeatherAttribute::CloudCover => (0.0..=1.0).contains(&v),
        WeatherAttribute::WindSpeed10m | WeatherAttribute::Irradiation => v >= 0.0 && v.is_finite(),
        WeatherAttribute::Temperature => v.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(format!("{attr} value {v} out of range"))
    }
}

/// Reads a weather CSV against a location registry. Rows are keyed by valid
/// time and lead; the issue time of a row is `timestamp_utc − lead_hours`.
pub fn load_weather_csv(path: impl AsRef<Path>, locations: &[Location]) -> Result<WeatherPanel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_weather(path, file, locations)
}

pub(crate) fn read_weather<R: std::io::Read>(path: &Path, reader: R, locations: &[Location]) -> Result<WeatherPanel> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(path, 1, e))?.clone();
    check_header(path, &headers, &WEATHER_HEADER)?;

    struct Row {
        issue: DateTime<Utc>,
        lead: usize,
        loc: usize,
        values: [f64; 4],
        line: usize,
    }
    let mut rows = Vec::new();
    let mut max_lead = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            csv_error(path, line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let valid = parse_utc(&record[0]).map_err(err)?;
        let lead: usize = record[1]
            .trim()
            .parse()
            .ok()
            .filter(|&l| l > 0)
            .ok_or_else(|| err(format!("lead_hours must be a positive integer, got {:?}", &record[1])))?;
        let id = record[2].trim();
        let loc = locations
            .iter()
            .position(|l| l.id == id)
            .ok_or_else(|| err(format!("location {id:?} not in the registry")))?;
        let mut values = [f64::NAN; 4];
        for (k, attr) in WeatherAttribute::ALL.iter().enumerate() {
            let cell = record[3 + k].trim();
            if cell.is_empty() {
                continue;
            }
            let v = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("column {}: non-numeric value {cell:?}", WEATHER_HEADER[3 + k])))?;
            check_attribute(*attr, v).map_err(err)?;
            values[k] = v;
        }
        max_lead = max_lead.max(lead);
        rows.push(Row {
            issue: valid - Duration::hours(lead as i64),
            lead,
            loc,
            values,
            line,
        });
    }

    let mut panel = WeatherPanel::new(locations.to_vec(), max_lead.max(1))?;
    let run_len = panel.run_len();
    let mut seen: BTreeMap<DateTime<Utc>, Vec<bool>> = BTreeMap::new();
    for row in &rows {
        let base = panel.offset(row.lead, row.loc, WeatherAttribute::Irradiation);
        let flags = seen
            .entry(row.issue)
            .or_insert_with(|| vec![false; run_len / 4]);
        if std::mem::replace(&mut flags[base / 4], true) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: row.line,
                message: format!(
                    "duplicate row for run {} lead {} location {}",
                    format_utc(row.issue),
                    row.lead,
                    locations[row.loc].id
                ),
            });
        }
        let run = panel
            .runs
            .entry(row.issue)
            .or_insert_with(|| vec![f64::NAN; run_len]);
        run[base..base + 4].copy_from_slice(&row.values);
    }
    for (issue, flags) in &seen {
        if let Some(cell) = flags.iter().position(|f| !f) {
            let lead = cell / locations.len() + 1;
            let loc = cell % locations.len();
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: format!(
                    "run issued {} lacks lead {lead} for location {}; mark missing cells with empty fields",
                    format_utc(*issue),
                    locations[loc].id
                ),
            });
        }
    }
    Ok(panel)
}

pub fn write_weather_csv(panel: &WeatherPanel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, 0, e))?;
    w.write_record(WEATHER_HEADER).map_err(|e| csv_error(path, 0, e))?;
    for (&issue, run) in &panel.runs {
        for lead in 1..=panel.max_lead {
            let valid = issue + Duration::hours(lead as i64);
            for (li, loc) in panel.locations.iter().enumerate() {
                let base = panel.offset(lead, li, WeatherAttribute::Irradiation);
                let mut row = vec![format_utc(valid), lead.to_string(), loc.id.clone()];
                row.extend(run[base..base + 4].iter().map(|v| if v.is_nan() { String::new() } else { v.to_string() }));
                w.write_record(&row).map_err(|e| csv_error(path, 0, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
