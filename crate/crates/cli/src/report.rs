//! The `report` command: tables recomputed from a backtest directory and,
//! on request, charts drawn from those tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use structcast::backtest::{
    dm_table, missing_panel_files, panel_metrics, read_error_panel, write_dm_csv, write_metrics_csv, Loss,
};
use structcast::{Error, Result};

use crate::svg::{LineChart, Series};

pub const REPORT_DIR: &str = "report";

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })
}

/// Rows of a CSV as maps from header to field.
fn read_table(path: &Path) -> Result<Vec<BTreeMap<String, String>>> {
    let mut rdr = reader(path)?;
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    rdr.records()
        .enumerate()
        .map(|(i, r)| {
            let r = r.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: e.to_string(),
            })?;
            Ok(header.iter().zip(r.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        })
        .collect()
}

fn col<'a>(path: &Path, row: &'a BTreeMap<String, String>, name: &str) -> Result<&'a str> {
    row.get(name).map(String::as_str).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: format!("no column {name}"),
    })
}

/// Mean price-ensembler weight per issue day, node and member, over the
/// horizon hours. Intercepts are left out.
fn write_weight_trajectories(weights_csv: &Path, out: &Path) -> Result<()> {
    let mut acc: BTreeMap<(String, String, String), (f64, usize)> = BTreeMap::new();
    for row in read_table(weights_csv)? {
        let member = col(weights_csv, &row, "member")?;
        if member == "intercept" {
            continue;
        }
        let w: f64 = col(weights_csv, &row, "weight")?.parse().map_err(|e| Error::Parse {
            path: weights_csv.to_path_buf(),
            line: 0,
            message: format!("weight: {e}"),
        })?;
        let key = (
            col(weights_csv, &row, "issue_date")?.to_string(),
            col(weights_csv, &row, "node")?.to_string(),
            member.to_string(),
        );
        let e = acc.entry(key).or_insert((0.0, 0));
        e.0 += w;
        e.1 += 1;
    }
    let mut w = csv::Writer::from_path(out).map_err(|e| Error::Internal(format!("{}: {e}", out.display())))?;
    let mut put = |rec: &[&str]| w.write_record(rec).map_err(|e| Error::Internal(format!("{}: {e}", out.display())));
    put(&["issue_date", "node", "member", "mean_weight"])?;
    for ((date, node, member), (sum, n)) in acc {
        put(&[&date, &node, &member, &(sum / n as f64).to_string()])?;
    }
    w.flush().map_err(|e| Error::io(out, e))
}

fn chart_metric(metrics_csv: &Path, field: &str) -> Result<LineChart> {
    let mut by_model: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    for row in read_table(metrics_csv)? {
        by_model
            .entry(col(metrics_csv, &row, "model")?.to_string())
            .or_default()
            .push((col(metrics_csv, &row, "horizon_hour")?.to_string(), col(metrics_csv, &row, field)?.to_string()));
    }
    Ok(LineChart {
        title: format!("{} by horizon hour", field.to_uppercase()),
        x_label: "horizon hour".into(),
        y_label: field.to_uppercase(),
        series: by_model.into_iter().map(|(name, points)| Series { name, points }).collect(),
        step: false,
    })
}

fn chart_weights(path: &Path) -> Result<LineChart> {
    let rows = read_table(path)?;
    let dates: Vec<String> = {
        let mut d: Vec<String> = rows.iter().map(|r| r["issue_date"].clone()).collect();
        d.dedup();
        d
    };
    let index: BTreeMap<&str, usize> = dates.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
    let mut by_member: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    for row in &rows {
        let name = format!("{}/{}", col(path, row, "node")?, col(path, row, "member")?);
        let day = index[col(path, row, "issue_date")?];
        by_member
            .entry(name)
            .or_default()
            .push((day.to_string(), col(path, row, "mean_weight")?.to_string()));
    }
    Ok(LineChart {
        title: format!(
            "Mean ensembler weights, {} to {}",
            dates.first().map(String::as_str).unwrap_or("-"),
            dates.last().map(String::as_str).unwrap_or("-")
        ),
        x_label: "issue day index".into(),
        y_label: "weight".into(),
        series: by_member.into_iter().map(|(name, points)| Series { name, points }).collect(),
        step: false,
    })
}

/// Curves of the last issue day in the snapshot table.
fn chart_curves(path: &Path) -> Result<LineChart> {
    let rows = read_table(path)?;
    let last = rows.last().map(|r| r["issue_date"].clone()).unwrap_or_default();
    let mut by_window: BTreeMap<u32, Vec<(String, String)>> = BTreeMap::new();
    for row in rows.iter().filter(|r| r["issue_date"] == last) {
        let weeks: u32 = col(path, row, "window_weeks")?.parse().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("window_weeks: {e}"),
        })?;
        by_window.entry(weeks).or_default().push((
            col(path, row, "residual_load_mw")?.to_string(),
            col(path, row, "price_eur_mwh")?.to_string(),
        ));
    }
    Ok(LineChart {
        title: format!("Supply curves issued {last}"),
        x_label: "residual load (MW)".into(),
        y_label: "price (EUR/MWh)".into(),
        series: by_window
            .into_iter()
            .map(|(w, points)| Series {
                name: format!("{w}-week window"),
                points,
            })
            .collect(),
        step: true,
    })
}

fn write_svg(path: PathBuf, chart: LineChart) -> Result<()> {
    std::fs::write(&path, chart.render()).map_err(|e| Error::io(&path, e))
}

pub fn cmd_report(dir: &Path, charts: bool, loss: Loss, horizon_hours: usize) -> Result<()> {
    let missing = missing_panel_files(dir);
    if !missing.is_empty() {
        return Err(Error::input(format!(
            "{} is not a complete backtest directory; missing {}",
            dir.display(),
            missing.join(", ")
        )));
    }
    let panel = read_error_panel(dir, horizon_hours)?;
    let out = dir.join(REPORT_DIR);
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;

    write_metrics_csv(&panel_metrics(&panel)?, out.join("metrics.csv"))?;
    write_dm_csv(&dm_table(&panel, loss, false)?, loss, out.join("dm.csv"))?;
    write_dm_csv(&dm_table(&panel, loss, true)?, loss, out.join("dm_newey_west.csv"))?;
    write_weight_trajectories(&dir.join("weights.csv"), &out.join("weight_trajectories.csv"))?;
    let curves = out.join("curves.csv");
    std::fs::copy(dir.join("curves.csv"), &curves).map_err(|e| Error::io(&curves, e))?;

    if charts {
        let metrics = out.join("metrics.csv");
        write_svg(out.join("rmse.svg"), chart_metric(&metrics, "rmse")?)?;
        write_svg(out.join("nrmse.svg"), chart_metric(&metrics, "nrmse")?)?;
        write_svg(out.join("weights.svg"), chart_weights(&out.join("weight_trajectories.csv"))?)?;
        write_svg(out.join("curves.svg"), chart_curves(&curves)?)?;
    }
    eprintln!("report written to {}", out.display());
    Ok(())
}
