//! CSV files of a backtest run and the readers the report step uses.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use super::dm::{dm_test, newey_west_lag, DmResult, Loss};
use super::metrics::{hour_metrics, HourMetric};
use super::panel::ErrorPanel;
use super::rolling::BacktestRun;
use crate::data::save_state;
use crate::error::{Error, ErrorKind, Result};
use crate::models::{write_bundles_csv, ForecastBundle};

pub const ERRORS_CSV: &str = "errors.csv";
pub const ACTUALS_CSV: &str = "actuals.csv";
pub const METRICS_CSV: &str = "metrics.csv";
pub const DM_CSV: &str = "dm.csv";
pub const DM_NEWEY_WEST_CSV: &str = "dm_newey_west.csv";
pub const BUNDLES_CSV: &str = "bundles.csv";
pub const WEIGHTS_CSV: &str = "weights.csv";
pub const CURVES_CSV: &str = "curves.csv";
pub const FAILURES_CSV: &str = "failures.csv";
pub const STATE_JSON: &str = "state.json";

/// Files the report step needs from a backtest directory.
pub const PANEL_FILES: [&str; 4] = [ERRORS_CSV, ACTUALS_CSV, WEIGHTS_CSV, CURVES_CSV];

struct Table {
    path: PathBuf,
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(path: &Path, header: &[&str]) -> Result<Self> {
        let mut t = Table {
            path: path.to_path_buf(),
            w: csv::Writer::from_writer(Vec::new()),
        };
        t.row(header)?;
        Ok(t)
    }

    fn row<S: AsRef<[u8]>>(&mut self, fields: impl IntoIterator<Item = S>) -> Result<()> {
        self.w
            .write_record(fields)
            .map_err(|e| Error::Internal(format!("{}: {e}", self.path.display())))
    }

    fn finish(self) -> Result<()> {
        let bytes = self
            .w
            .into_inner()
            .map_err(|e| Error::Internal(format!("{}: {e}", self.path.display())))?;
        std::fs::write(&self.path, bytes).map_err(|e| Error::io(&self.path, e))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn kind_label(k: ErrorKind) -> &'static str {
    match k {
        ErrorKind::Data => "data",
        ErrorKind::Usage => "usage",
        ErrorKind::Training => "training",
        ErrorKind::Internal => "internal",
    }
}

/// One row per finite error: `model, horizon_hour, issue_date, error`.
pub fn write_errors_csv(panel: &ErrorPanel, path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::new(path.as_ref(), &["model", "horizon_hour", "issue_date", "error"])?;
    for (model, days) in &panel.errors {
        for h in 1..=panel.horizon_hours {
            for (date, e) in panel.dates.iter().zip(days) {
                if e[h - 1].is_finite() {
                    t.row([model.clone(), h.to_string(), date.to_string(), e[h - 1].to_string()])?;
                }
            }
        }
    }
    t.finish()
}

pub fn write_actuals_csv(panel: &ErrorPanel, path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::new(path.as_ref(), &["issue_date", "horizon_hour", "actual"])?;
    for (date, a) in panel.dates.iter().zip(&panel.actuals) {
        for (i, v) in a.iter().enumerate() {
            if v.is_finite() {
                t.row([date.to_string(), (i + 1).to_string(), v.to_string()])?;
            }
        }
    }
    t.finish()
}

pub fn panel_metrics(panel: &ErrorPanel) -> Result<Vec<(String, HourMetric)>> {
    let mut out = Vec::new();
    for model in panel.models() {
        out.extend(hour_metrics(panel, model)?.into_iter().map(|m| (model.to_string(), m)));
    }
    Ok(out)
}

pub fn write_metrics_csv(metrics: &[(String, HourMetric)], path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::new(path.as_ref(), &["model", "horizon_hour", "rmse", "nrmse", "n"])?;
    for (model, m) in metrics {
        t.row([model.clone(), m.horizon_hour.to_string(), opt(m.rmse), opt(m.nrmse), m.n.to_string()])?;
    }
    t.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmRow {
    pub model_a: String,
    pub model_b: String,
    pub horizon_hour: usize,
    /// `None` when fewer than two paired days exist.
    pub result: Option<DmResult>,
}

/// Every unordered model pair at every horizon hour. With `newey_west`
/// only hours beyond the first day are tested, at lag `⌈h/24⌉ − 1`.
pub fn dm_table(panel: &ErrorPanel, loss: Loss, newey_west: bool) -> Result<Vec<DmRow>> {
    let models: Vec<&str> = panel.models().collect();
    let mut rows = Vec::new();
    for (i, a) in models.iter().enumerate() {
        for b in &models[i + 1..] {
            for h in 1..=panel.horizon_hours {
                let lag = if newey_west {
                    if h <= 24 {
                        continue;
                    }
                    newey_west_lag(h)
                } else {
                    0
                };
                let (ea, eb) = panel.paired(a, b, h)?;
                let result = if ea.len() < 2 { None } else { Some(dm_test(&ea, &eb, loss, lag)?) };
                rows.push(DmRow {
                    model_a: a.to_string(),
                    model_b: b.to_string(),
                    horizon_hour: h,
                    result,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_dm_csv(rows: &[DmRow], loss: Loss, path: impl AsRef<Path>) -> Result<()> {
    let header = [
        "model_a", "model_b", "horizon_hour", "statistic", "p_value", "loss", "n", "lag", "low_sample", "degenerate",
    ];
    let mut t = Table::new(path.as_ref(), &header)?;
    for r in rows {
        let (stat, p, n, lag, low, degenerate) = match &r.result {
            Some(d) => (
                d.statistic.to_string(),
                d.p_value.to_string(),
                d.n.to_string(),
                d.lag.to_string(),
                d.low_sample.to_string(),
                d.degenerate.to_string(),
            ),
            None => Default::default(),
        };
        t.row([
            r.model_a.clone(),
            r.model_b.clone(),
            r.horizon_hour.to_string(),
            stat,
            p,
            loss.to_string(),
            n,
            lag,
            low,
            degenerate,
        ])?;
    }
    t.finish()
}

/// Ensembler weights per issue day: the trajectories behind weight plots.
pub fn write_weights_csv(bundles: &[ForecastBundle], path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::new(
        path.as_ref(),
        &["issue_date", "node", "horizon_hour", "member", "weight", "fallback"],
    )?;
    for b in bundles {
        for w in &b.weights {
            t.row([
                b.issue_date.to_string(),
                w.node.label().to_string(),
                w.horizon_hour.to_string(),
                w.member.clone(),
                w.weight.to_string(),
                w.fallback.to_string(),
            ])?;
        }
    }
    t.finish()
}

/// Breakpoints and levels of each issue day's supply curves, with runs of
/// equal level merged.
pub fn write_curves_csv(bundles: &[ForecastBundle], path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::new(
        path.as_ref(),
        &["issue_date", "window_weeks", "residual_load_mw", "price_eur_mwh"],
    )?;
    for b in bundles {
        for c in &b.curves {
            let curve = c.curve.compressed();
            for (x, y) in curve.breakpoints().iter().zip(curve.levels()) {
                t.row([b.issue_date.to_string(), c.weeks.to_string(), x.to_string(), y.to_string()])?;
            }
        }
    }
    t.finish()
}

pub fn write_failures_csv(run: &BacktestRun, path: impl AsRef<Path>) -> Result<()> {
    let mut t = Table::new(
        path.as_ref(),
        &["issue_date", "scored", "kind", "node", "horizon_hour", "message"],
    )?;
    for f in &run.failures {
        t.row([
            f.issue_date.to_string(),
            f.scored.to_string(),
            kind_label(f.kind).to_string(),
            f.node.clone().unwrap_or_default(),
            f.horizon_hour.map(|h| h.to_string()).unwrap_or_default(),
            f.message.clone(),
        ])?;
    }
    t.finish()
}

/// Writes every artifact of a run into `dir`, creating it if needed.
/// Metrics and tests need at least two scored days; with fewer the
/// corresponding files are left out.
pub fn export_backtest(run: &BacktestRun, dir: impl AsRef<Path>, loss: Loss) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_errors_csv(&run.panel, dir.join(ERRORS_CSV))?;
    write_actuals_csv(&run.panel, dir.join(ACTUALS_CSV))?;
    write_bundles_csv(dir.join(BUNDLES_CSV), &run.bundles)?;
    write_weights_csv(&run.bundles, dir.join(WEIGHTS_CSV))?;
    write_curves_csv(&run.bundles, dir.join(CURVES_CSV))?;
    write_failures_csv(run, dir.join(FAILURES_CSV))?;
    if run.panel.len() >= 2 {
        write_metrics_csv(&panel_metrics(&run.panel)?, dir.join(METRICS_CSV))?;
        write_dm_csv(&dm_table(&run.panel, loss, false)?, loss, dir.join(DM_CSV))?;
        write_dm_csv(&dm_table(&run.panel, loss, true)?, loss, dir.join(DM_NEWEY_WEST_CSV))?;
    }
    save_state(&run.state, dir.join(STATE_JSON))
}

/// Names of the `PANEL_FILES` absent from `dir`.
pub fn missing_panel_files(dir: impl AsRef<Path>) -> Vec<&'static str> {
    PANEL_FILES
        .iter()
        .copied()
        .filter(|f| !dir.as_ref().join(f).is_file())
        .collect()
}

fn read_rows(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    rdr.records()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, rec: &csv::StringRecord, i: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(i).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("missing column {}", i + 1),
    })?;
    raw.parse().map_err(|e: T::Err| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("{raw:?}: {e}"),
    })
}

/// Rebuilds the panel from `errors.csv` and `actuals.csv`. Errors are read
/// back bit-exactly, so metrics recomputed from the files equal those of
/// the run.
pub fn read_error_panel(dir: impl AsRef<Path>, horizon_hours: usize) -> Result<ErrorPanel> {
    let dir = dir.as_ref();
    let errors_path = dir.join(ERRORS_CSV);
    let actuals_path = dir.join(ACTUALS_CSV);
    let mut actuals: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    let mut errors: BTreeMap<String, BTreeMap<NaiveDate, Vec<f64>>> = BTreeMap::new();
    let mut dates = BTreeSet::new();
    let hour = |path: &Path, line: usize, h: usize| -> Result<usize> {
        if h == 0 || h > horizon_hours {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("horizon hour {h} outside 1..={horizon_hours}"),
            });
        }
        Ok(h - 1)
    };
    for (i, rec) in read_rows(&actuals_path)?.iter().enumerate() {
        let line = i + 2;
        let date: NaiveDate = field(&actuals_path, line, rec, 0)?;
        let h = hour(&actuals_path, line, field(&actuals_path, line, rec, 1)?)?;
        let v: f64 = field(&actuals_path, line, rec, 2)?;
        dates.insert(date);
        actuals.entry(date).or_insert_with(|| vec![f64::NAN; horizon_hours])[h] = v;
    }
    for (i, rec) in read_rows(&errors_path)?.iter().enumerate() {
        let line = i + 2;
        let model: String = field(&errors_path, line, rec, 0)?;
        let h = hour(&errors_path, line, field(&errors_path, line, rec, 1)?)?;
        let date: NaiveDate = field(&errors_path, line, rec, 2)?;
        let e: f64 = field(&errors_path, line, rec, 3)?;
        dates.insert(date);
        errors
            .entry(model)
            .or_default()
            .entry(date)
            .or_insert_with(|| vec![f64::NAN; horizon_hours])[h] = e;
    }
    let dates: Vec<NaiveDate> = dates.into_iter().collect();
    let nan_day = || vec![f64::NAN; horizon_hours];
    Ok(ErrorPanel {
        horizon_hours,
        actuals: dates.iter().map(|d| actuals.get(d).cloned().unwrap_or_else(nan_day)).collect(),
        errors: errors
            .into_iter()
            .map(|(m, by_day)| (m, dates.iter().map(|d| by_day.get(d).cloned().unwrap_or_else(nan_day)).collect()))
            .collect(),
        dates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panel_round_trips_through_csv() {
        let mut p = ErrorPanel::new(3);
        for (k, day) in [1u32, 2, 4].into_iter().enumerate() {
            let d = NaiveDate::from_ymd_opt(2023, 3, day).unwrap();
            let a = vec![10.0 + k as f64, f64::NAN, 0.1 * k as f64];
            let f = BTreeMap::from([
                ("x".to_string(), vec![1.0 / 3.0, 5.0, -2.5]),
                ("y".to_string(), vec![7.25, 1e-17, f64::NAN]),
            ]);
            p.push_day(d, a, &f).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        write_errors_csv(&p, dir.path().join(ERRORS_CSV)).unwrap();
        write_actuals_csv(&p, dir.path().join(ACTUALS_CSV)).unwrap();
        let q = read_error_panel(dir.path(), 3).unwrap();
        assert_eq!(q.dates, p.dates);
        for (m, days) in &p.errors {
            for (a, b) in days.iter().zip(&q.errors[m]) {
                for (x, y) in a.iter().zip(b) {
                    // values without an actual are not written
                    assert!(x.to_bits() == y.to_bits() || y.is_nan());
                }
            }
        }
        assert_eq!(panel_metrics(&p).unwrap(), panel_metrics(&q).unwrap());
        assert_eq!(missing_panel_files(dir.path()), vec![WEIGHTS_CSV, CURVES_CSV]);
    }

    #[test]
    fn dm_table_shapes() {
        let mut p = ErrorPanel::new(48);
        for day in 1..=5u32 {
            let d = NaiveDate::from_ymd_opt(2023, 3, day).unwrap();
            let f = BTreeMap::from([
                ("a".to_string(), vec![day as f64; 48]),
                ("b".to_string(), vec![(day * day) as f64 * 0.3; 48]),
                ("c".to_string(), vec![0.0; 48]),
            ]);
            p.push_day(d, vec![1.0; 48], &f).unwrap();
        }
        assert_eq!(dm_table(&p, Loss::Squared, false).unwrap().len(), 3 * 48);
        let nw = dm_table(&p, Loss::Squared, true).unwrap();
        assert_eq!(nw.len(), 3 * 24);
        assert!(nw.iter().all(|r| r.result.unwrap().lag == 1));
    }
}
