//! Forecast bundles: one issue day's 72-hour output with diagnostics.

use std::io::Write;
use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::lear::{fit_ensembler, EnsemblerFit};
use super::state::{HistoryRecord, Node};
use super::structured::WindowCurve;
use crate::data::time::{format_utc, parse_utc};
use crate::data::EngineConfig;
use crate::error::{Error, Result};
use crate::solvers::{predict_combination, ConstraintMode};

/// Quantity forecasts for one hour, MW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantityForecast {
    pub pv: f64,
    pub wind_on: f64,
    pub wind_off: f64,
    pub load: f64,
    pub net_imports: f64,
}

impl QuantityForecast {
    /// In [`crate::data::Quantity::DRIVERS`] order.
    pub fn drivers(&self) -> [f64; 5] {
        [self.pv, self.wind_on, self.wind_off, self.load, self.net_imports]
    }
}

/// `load − pv − wind_on − wind_off − net_imports`.
pub fn compute_residual_load(q: &QuantityForecast) -> Result<f64> {
    let named = [
        ("load", q.load),
        ("pv", q.pv),
        ("wind_on", q.wind_on),
        ("wind_off", q.wind_off),
        ("net_imports", q.net_imports),
    ];
    if let Some((name, _)) = named.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::input(format!("residual load needs a {name} forecast")));
    }
    Ok(q.load - q.pv - q.wind_on - q.wind_off - q.net_imports)
}

/// Fits the combined model's simplex ensembler on (direct, semi-structured,
/// structured) history and applies it.
pub fn combine_prices(
    direct: f64,
    semi_structured: f64,
    structured: f64,
    history: &[HistoryRecord],
    config: &EngineConfig,
) -> Result<(f64, EnsemblerFit)> {
    let fit = fit_ensembler(
        history,
        3,
        config.ensemble_window,
        ConstraintMode::SimplexFixedSum,
        config.cold_start,
    )?;
    let value = predict_combination(&fit.weights, &[direct, semi_structured, structured])?;
    Ok((value, fit))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleRow {
    pub horizon_hour: usize,
    pub target_time: DateTime<Utc>,
    pub pv: f64,
    pub wind_on: f64,
    pub wind_off: f64,
    pub load: f64,
    pub net_imports: f64,
    pub residual_load: f64,
    pub direct: f64,
    pub semi_structured: f64,
    pub structured: f64,
    pub combined: f64,
}

impl BundleRow {
    pub fn price(&self, model: &str) -> Option<f64> {
        Some(match model {
            "direct" => self.direct,
            "semi_structured" => self.semi_structured,
            "structured" => self.structured,
            "combined" => self.combined,
            _ => return None,
        })
    }
}

pub const PRICE_MODELS: [&str; 4] = ["direct", "semi_structured", "structured", "combined"];

/// One ensembler weight (or intercept) in effect for an issue day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightRecord {
    pub node: Node,
    pub horizon_hour: usize,
    pub member: String,
    pub weight: f64,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastBundle {
    pub issue_date: NaiveDate,
    pub rows: Vec<BundleRow>,
    /// Weights of the price-model ensemblers.
    pub weights: Vec<WeightRecord>,
    /// Nodes that used cold-start equal weights for at least one hour.
    pub fallback_nodes: Vec<Node>,
    pub curves: Vec<WindowCurve>,
}

pub const BUNDLE_HEADER: [&str; 13] = [
    "issue_date",
    "horizon_hour",
    "target_time_utc",
    "pv_mw",
    "wind_on_mw",
    "wind_off_mw",
    "load_mw",
    "net_imports_mw",
    "residual_load_mw",
    "direct",
    "semi_structured",
    "structured",
    "combined",
];

pub fn write_bundle_rows<W: Write>(out: &mut W, bundles: &[ForecastBundle]) -> std::io::Result<()> {
    writeln!(out, "{}", BUNDLE_HEADER.join(","))?;
    for b in bundles {
        for r in &b.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                b.issue_date,
                r.horizon_hour,
                format_utc(r.target_time),
                r.pv,
                r.wind_on,
                r.wind_off,
                r.load,
                r.net_imports,
                r.residual_load,
                r.direct,
                r.semi_structured,
                r.structured,
                r.combined
            )?;
        }
    }
    Ok(())
}

pub fn write_bundles_csv(path: impl AsRef<Path>, bundles: &[ForecastBundle]) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_bundle_rows(&mut buf, bundles).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Reads the rows of a bundle CSV, grouped by issue date in file order.
/// Weights and curves are not part of the file.
pub fn read_bundles_csv(path: impl AsRef<Path>) -> Result<Vec<(NaiveDate, Vec<BundleRow>)>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if header != BUNDLE_HEADER {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header {}", BUNDLE_HEADER.join(",")),
        });
    }
    let mut out: Vec<(NaiveDate, Vec<BundleRow>)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let bad = |m: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: m,
        };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .map_err(|_| bad(format!("{}: not a number: {:?}", BUNDLE_HEADER[k], &rec[k])))
        };
        let date: NaiveDate = rec[0].parse().map_err(|_| bad(format!("bad issue_date {:?}", &rec[0])))?;
        let row = BundleRow {
            horizon_hour: rec[1].parse().map_err(|_| bad(format!("bad horizon_hour {:?}", &rec[1])))?,
            target_time: parse_utc(&rec[2]).map_err(bad)?,
            pv: num(3)?,
            wind_on: num(4)?,
            wind_off: num(5)?,
            load: num(6)?,
            net_imports: num(7)?,
            residual_load: num(8)?,
            direct: num(9)?,
            semi_structured: num(10)?,
            structured: num(11)?,
            combined: num(12)?,
        };
        match out.last_mut() {
            Some((d, rows)) if *d == date => rows.push(row),
            _ => out.push((date, vec![row])),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColdStart;

    fn q(load: f64, pv: f64, won: f64, woff: f64, ni: f64) -> QuantityForecast {
        QuantityForecast {
            pv,
            wind_on: won,
            wind_off: woff,
            load,
            net_imports: ni,
        }
    }

    #[test]
    fn residual_load_arithmetic() {
        assert_eq!(compute_residual_load(&q(50000.0, 5000.0, 10000.0, 3000.0, 2000.0)).unwrap(), 30000.0);
        assert_eq!(compute_residual_load(&q(0.0, 0.0, 0.0, 0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(compute_residual_load(&q(50000.0, 5000.0, 10000.0, 3000.0, -2000.0)).unwrap(), 34000.0);
        let err = compute_residual_load(&q(1.0, f64::NAN, 0.0, 0.0, 0.0)).unwrap_err();
        assert!(err.to_string().contains("pv"));
    }

    #[test]
    fn combined_agreement_and_cold_start() {
        let cfg = EngineConfig::default();
        let (v, fit) = combine_prices(80.0, 80.0, 80.0, &[], &cfg).unwrap();
        assert_eq!(v, 80.0);
        assert!(fit.fallback);
        assert!(fit.weights.weights.iter().all(|&w| (w - 1.0 / 3.0).abs() < 1e-15));
        let strict = EngineConfig {
            cold_start: ColdStart::Strict,
            ..cfg
        };
        assert!(combine_prices(1.0, 2.0, 3.0, &[], &strict).is_err());
    }

    #[test]
    fn exact_member_dominates() {
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        use rand_distr::{Distribution, Normal};
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = Normal::new(0.0, 10.0).unwrap();
        let d0 = NaiveDate::from_ymd_opt(2022, 1, 1).unwrap();
        let hist: Vec<HistoryRecord> = (0..100)
            .map(|i| {
                let y = 60.0 + n.sample(&mut rng);
                HistoryRecord {
                    issue_date: d0 + chrono::Duration::days(i),
                    predictions: vec![y + n.sample(&mut rng), y + n.sample(&mut rng), y],
                    actual: y,
                }
            })
            .collect();
        let (_, fit) = combine_prices(1.0, 2.0, 3.0, &hist, &EngineConfig::default()).unwrap();
        assert!(fit.weights.weights[2] >= 0.9, "{:?}", fit.weights);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = crate::data::time::target_time(NaiveDate::from_ymd_opt(2023, 1, 2).unwrap(), 1);
        let row = BundleRow {
            horizon_hour: 1,
            target_time: t,
            pv: 0.1 + 0.2,
            wind_on: 1.0 / 3.0,
            wind_off: 2e-17,
            load: 55123.456789,
            net_imports: -1234.5,
            residual_load: 7.0,
            direct: std::f64::consts::PI,
            semi_structured: 1e300,
            structured: -0.0,
            combined: 42.0,
        };
        let b = ForecastBundle {
            issue_date: NaiveDate::from_ymd_opt(2023, 1, 2).unwrap(),
            rows: vec![row.clone()],
            weights: vec![],
            fallback_nodes: vec![],
            curves: vec![],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.csv");
        write_bundles_csv(&p, &[b]).unwrap();
        let back = read_bundles_csv(&p).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].1[0], row);
    }
}
