//! Wind speed to capacity factor: logarithmic height extrapolation followed
//! by a turbine power curve.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Extrapolates a 10 m wind speed to `hub_height` with the logarithmic
/// profile law for roughness length `z0`.
pub fn log_profile_transform(v10: f64, z0: f64, hub_height: f64) -> Result<f64> {
    if !(v10 >= 0.0 && v10.is_finite()) {
        return Err(Error::input(format!("10 m wind speed must be non-negative, got {v10}")));
    }
    if !(z0 > 0.0 && z0 < 10.0) {
        return Err(Error::input(format!("roughness length must be in (0, 10) m, got {z0}")));
    }
    if !(hub_height > z0 && hub_height.is_finite()) {
        return Err(Error::input(format!(
            "hub height {hub_height} m must exceed the roughness length {z0} m"
        )));
    }
    Ok(v10 * (hub_height / z0).ln() / (10.0 / z0).ln())
}

/// Piecewise-linear power curve. Factors are fractions of rated power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurveTable {
    pub turbine_name: String,
    points: Vec<(f64, f64)>,
}

impl PowerCurveTable {
    /// Validates speeds strictly increasing from zero and factors in
    /// `[0, 1]`, starting and ending at zero so the curve is continuous.
    pub fn new(turbine_name: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        let turbine_name = turbine_name.into();
        if points.len() < 2 {
            return Err(Error::input(format!("power curve {turbine_name} needs at least two points")));
        }
        if points.iter().any(|&(v, f)| !v.is_finite() || !(0.0..=1.0).contains(&f) || v < 0.0) {
            return Err(Error::input(format!(
                "power curve {turbine_name}: speeds must be non-negative and factors within [0, 1]"
            )));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::input(format!("power curve {turbine_name}: speeds must be strictly increasing")));
        }
        if points[0].1 != 0.0 || points[points.len() - 1].1 != 0.0 {
            return Err(Error::input(format!(
                "power curve {turbine_name}: first and last factors must be 0 (append a cut-out point)"
            )));
        }
        Ok(PowerCurveTable { turbine_name, points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Reads a two-column `wind_speed_ms,capacity_factor` CSV.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        let headers = rdr.headers().map_err(|e| parse_err(path, 1, e.to_string()))?.clone();
        let got: Vec<&str> = headers.iter().map(str::trim).collect();
        if got != ["wind_speed_ms", "capacity_factor"] {
            return Err(parse_err(path, 1, format!("expected header wind_speed_ms,capacity_factor, found {}", got.join(","))));
        }
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| parse_err(path, 0, e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let num = |i: usize| {
                rec[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(path, line, format!("non-numeric value {:?}", &rec[i])))
            };
            points.push((num(0)?, num(1)?));
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        PowerCurveTable::new(name, points)
    }

    /// A generic 3–4 MW class onshore curve (cut-in 3 m/s, rated 12.5 m/s,
    /// cut-out 25 m/s).
    pub fn generic_onshore() -> Self {
        let pts = vec![
            (0.0, 0.0),
            (3.0, 0.0),
            (4.0, 0.035),
            (5.0, 0.085),
            (6.0, 0.16),
            (7.0, 0.26),
            (8.0, 0.39),
            (9.0, 0.54),
            (10.0, 0.70),
            (11.0, 0.84),
            (12.0, 0.95),
            (12.5, 1.0),
            (25.0, 1.0),
            (26.0, 0.0),
        ];
        PowerCurveTable::new("generic-onshore", pts).expect("valid built-in curve")
    }

    /// A generic 8 MW class offshore curve (cut-in 3.5 m/s, rated 12 m/s).
    pub fn generic_offshore() -> Self {
        let pts = vec![
            (0.0, 0.0),
            (3.5, 0.0),
            (4.0, 0.02),
            (5.0, 0.07),
            (6.0, 0.14),
            (7.0, 0.24),
            (8.0, 0.37),
            (9.0, 0.53),
            (10.0, 0.70),
            (11.0, 0.87),
            (12.0, 1.0),
            (25.0, 1.0),
            (26.0, 0.0),
        ];
        PowerCurveTable::new("generic-offshore", pts).expect("valid built-in curve")
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = String::from("wind_speed_ms,capacity_factor\n");
        for (v, f) in &self.points {
            text += &format!("{v},{f}\n");
        }
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn parse_err(path: &Path, line: usize, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    }
}

/// Capacity factor at hub-height speed `v` by linear interpolation; zero
/// outside the table.
pub fn apply_power_curve(v: f64, curve: &PowerCurveTable) -> Result<f64> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::input(format!("wind speed must be non-negative, got {v}")));
    }
    let pts = &curve.points;
    if pts.is_empty() {
        return Err(Error::input("empty power curve"));
    }
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    if v < first.0 || v > last.0 {
        return Ok(0.0);
    }
    let i = pts.partition_point(|&(s, _)| s <= v);
    if i == pts.len() {
        return Ok(last.1);
    }
    let (v0, f0) = pts[i - 1];
    let (v1, f1) = pts[i];
    if v == v0 {
        return Ok(f0);
    }
    Ok(f0 + (f1 - f0) * (v - v0) / (v1 - v0))
}
