//! Engine configuration, read from TOML.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What to do when an ensembler has fewer realized observations than its
/// window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColdStart {
    /// Fail the forecast day.
    Strict,
    /// Use equal weights until the window fills.
    Fallback,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    pub market_csv: Option<PathBuf>,
    pub weather_csv: Option<PathBuf>,
    pub locations_csv: Option<PathBuf>,
    /// Built-in generic curves are used when absent.
    pub onshore_power_curve_csv: Option<PathBuf>,
    pub offshore_power_curve_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Daily rows per LASSO fit.
    pub lear_window: usize,
    /// Realized observations per ensembler fit.
    pub ensemble_window: usize,
    pub lambdas: Vec<f64>,
    /// Linear decay lengths of the supply-curve weights.
    pub decay_weeks: Vec<u32>,
    pub horizon_hours: usize,
    pub lag_days: Vec<u32>,
    pub hub_height_onshore_m: f64,
    pub hub_height_offshore_m: f64,
    pub cold_start: ColdStart,
    pub lasso_tol: f64,
    pub lasso_max_iter: usize,
    pub max_forward_fill_hours: usize,
    /// Clip PV and wind forecasts at zero before forming residual load.
    pub clip_nonnegative: bool,
    /// Days run before a backtest's start date to fill ensembler histories.
    pub warmup_days: usize,
    pub holidays: Vec<NaiveDate>,
    pub paths: DataPaths,
}

pub fn default_lambdas() -> Vec<f64> {
    [-2.0, -1.5, -1.0, -0.5, 0.0]
        .iter()
        .map(|e: &f64| 10f64.powf(*e))
        .collect()
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            lear_window: 84,
            ensemble_window: 100,
            lambdas: default_lambdas(),
            decay_weeks: vec![1, 2, 4, 8],
            horizon_hours: 72,
            lag_days: vec![1, 2, 7],
            hub_height_onshore_m: 100.0,
            hub_height_offshore_m: 120.0,
            cold_start: ColdStart::Fallback,
            lasso_tol: crate::solvers::lasso::DEFAULT_TOL,
            lasso_max_iter: crate::solvers::lasso::DEFAULT_MAX_ITER,
            max_forward_fill_hours: 3,
            clip_nonnegative: false,
            warmup_days: 110,
            holidays: Vec::new(),
            paths: DataPaths::default(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.lear_window < 2 {
            return bad(format!("lear_window must be at least 2, got {}", self.lear_window));
        }
        if self.ensemble_window == 0 {
            return bad("ensemble_window must be positive".into());
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return bad("lambdas must be a non-empty list of positive values".into());
        }
        if self.lambdas.windows(2).any(|w| w[0] >= w[1]) {
            return bad("lambdas must be sorted ascending without duplicates".into());
        }
        if self.decay_weeks.is_empty() || self.decay_weeks.contains(&0) {
            return bad("decay_weeks must be a non-empty list of positive values".into());
        }
        if self.decay_weeks.windows(2).any(|w| w[0] >= w[1]) {
            return bad("decay_weeks must be sorted ascending".into());
        }
        if self.horizon_hours == 0 || self.horizon_hours % 24 != 0 {
            return bad(format!("horizon_hours must be a positive multiple of 24, got {}", self.horizon_hours));
        }
        if self.lag_days.is_empty() || self.lag_days.contains(&0) {
            return bad("lag_days must be a non-empty list of positive day offsets".into());
        }
        for (name, h) in [
            ("hub_height_onshore_m", self.hub_height_onshore_m),
            ("hub_height_offshore_m", self.hub_height_offshore_m),
        ] {
            if !(h > 10.0 && h.is_finite()) {
                return bad(format!("{name} must exceed 10 m, got {h}"));
            }
        }
        if !(self.lasso_tol > 0.0) || self.lasso_max_iter == 0 {
            return bad("lasso_tol and lasso_max_iter must be positive".into());
        }
        Ok(())
    }

    pub fn holiday_set(&self) -> BTreeSet<NaiveDate> {
        self.holidays.iter().copied().collect()
    }

    pub fn horizon_days(&self) -> usize {
        self.horizon_hours / 24
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: EngineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative data paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(dir) = path.parent() {
            let p = &mut cfg.paths;
            for slot in [
                &mut p.market_csv,
                &mut p.weather_csv,
                &mut p.locations_csv,
                &mut p.onshore_power_curve_csv,
                &mut p.offshore_power_curve_csv,
            ] {
                if let Some(rel) = slot.as_ref().filter(|p| p.is_relative()) {
                    *slot = Some(dir.join(rel));
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}
