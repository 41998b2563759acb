//! Diebold–Mariano test of equal predictive accuracy.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::panel::ErrorPanel;
use crate::error::{Error, Result};

/// Reported in place of ±∞ when the loss differential is a non-zero
/// constant.
pub const DM_STATISTIC_CAP: f64 = 1e6;
pub const DM_LOW_SAMPLE: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Squared,
    Absolute,
}

impl Loss {
    pub fn apply(self, e: f64) -> f64 {
        match self {
            Loss::Squared => e * e,
            Loss::Absolute => e.abs(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Loss::Squared => "squared",
            Loss::Absolute => "absolute",
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which model the sign of the statistic favors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Favors {
    ModelA,
    ModelB,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    /// Positive when model A has the larger loss, i.e. favors model B.
    pub statistic: f64,
    pub p_value: f64,
    pub loss: Loss,
    pub favors: Favors,
    pub n: usize,
    /// Bartlett-kernel lag of the long-run variance; 0 for the plain test.
    pub lag: usize,
    pub low_sample: bool,
    /// The loss differential had zero variance and non-zero mean.
    pub degenerate: bool,
}

/// Tests `errors_a` against `errors_b` (paired by position). With
/// `lag > 0` the variance of the loss differential is a Newey–West
/// estimate with Bartlett weights.
pub fn dm_test(errors_a: &[f64], errors_b: &[f64], loss: Loss, lag: usize) -> Result<DmResult> {
    let n = errors_a.len();
    if n != errors_b.len() {
        return Err(Error::input(format!(
            "paired error vectors differ in length ({n} vs {})",
            errors_b.len()
        )));
    }
    if n < 2 {
        return Err(Error::input(format!("Diebold–Mariano needs at least 2 pairs, got {n}")));
    }
    if errors_a.iter().chain(errors_b).any(|e| !e.is_finite()) {
        return Err(Error::input("non-finite forecast error"));
    }
    let d: Vec<f64> = errors_a
        .iter()
        .zip(errors_b)
        .map(|(&a, &b)| loss.apply(a) - loss.apply(b))
        .collect();
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let autocov = |k: usize| -> f64 { (k..n).map(|t| (d[t] - mean) * (d[t - k] - mean)).sum::<f64>() / nf };
    let mut lrv = autocov(0);
    for k in 1..=lag.min(n - 1) {
        lrv += 2.0 * (1.0 - k as f64 / (lag as f64 + 1.0)) * autocov(k);
    }
    // matches the N − 1 sample variance when lag = 0
    let var = lrv * nf / (nf - 1.0);

    let (statistic, p_value, degenerate) = if var <= 0.0 {
        if mean == 0.0 {
            (0.0, 1.0, false)
        } else {
            (DM_STATISTIC_CAP.copysign(mean), 0.0, true)
        }
    } else {
        let s = mean / (var / nf).sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        let p = (2.0 * normal.sf(s.abs())).clamp(0.0, 1.0);
        (s, p, false)
    };
    let favors = if statistic > 0.0 {
        Favors::ModelB
    } else if statistic < 0.0 {
        Favors::ModelA
    } else {
        Favors::Neither
    };
    Ok(DmResult {
        statistic,
        p_value,
        loss,
        favors,
        n,
        lag,
        low_sample: n < DM_LOW_SAMPLE,
        degenerate,
    })
}

/// Plain (lag-0) test at one horizon hour.
pub fn diebold_mariano(panel: &ErrorPanel, model_a: &str, model_b: &str, horizon_hour: usize, loss: Loss) -> Result<DmResult> {
    let (a, b) = panel.paired(model_a, model_b, horizon_hour)?;
    dm_test(&a, &b, loss, 0)
}

/// Overlap lag for a daily-issued forecast at horizon hour `h`:
/// `⌈h/24⌉ − 1`.
pub fn newey_west_lag(horizon_hour: usize) -> usize {
    horizon_hour.div_ceil(24).saturating_sub(1)
}

pub fn diebold_mariano_newey_west(
    panel: &ErrorPanel,
    model_a: &str,
    model_b: &str,
    horizon_hour: usize,
    loss: Loss,
) -> Result<DmResult> {
    let (a, b) = panel.paired(model_a, model_b, horizon_hour)?;
    dm_test(&a, &b, loss, newey_west_lag(horizon_hour))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_errors() {
        let e = [1.0, -2.0, 0.5, 3.0];
        let r = dm_test(&e, &e, Loss::Squared, 0).unwrap();
        assert_eq!((r.statistic, r.p_value, r.favors), (0.0, 1.0, Favors::Neither));
        assert!(r.low_sample);
    }

    #[test]
    fn constant_differential_is_capped() {
        let a = vec![2.0; 40];
        let b = vec![1.0; 40];
        let r = dm_test(&a, &b, Loss::Absolute, 0).unwrap();
        assert_eq!(r.statistic, DM_STATISTIC_CAP);
        assert_eq!(r.p_value, 0.0);
        assert!(r.degenerate);
        assert_eq!(r.favors, Favors::ModelB);
        assert!(!r.low_sample);
    }

    #[test]
    fn hand_computed_statistic() {
        // d = (3, 1, 2) under absolute loss: mean 2, var 1
        let a = [4.0, 2.0, 3.0];
        let b = [1.0, 1.0, 1.0];
        let r = dm_test(&a, &b, Loss::Absolute, 0).unwrap();
        assert!((r.statistic - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        let p = 2.0 * (1.0 - Normal::new(0.0, 1.0).unwrap().cdf(2.0 * 3f64.sqrt()));
        assert!((r.p_value - p).abs() < 1e-12);
    }

    #[test]
    fn antisymmetric() {
        let a = [0.3, -1.2, 2.2, 0.1, -0.7];
        let b = [1.1, 0.4, -0.3, 0.9, 0.2];
        for lag in [0, 2] {
            let ab = dm_test(&a, &b, Loss::Squared, lag).unwrap();
            let ba = dm_test(&b, &a, Loss::Squared, lag).unwrap();
            assert_eq!(ab.statistic, -ba.statistic);
            assert_eq!(ab.p_value, ba.p_value);
        }
    }

    #[test]
    fn newey_west_lags() {
        assert_eq!(newey_west_lag(1), 0);
        assert_eq!(newey_west_lag(24), 0);
        assert_eq!(newey_west_lag(25), 1);
        assert_eq!(newey_west_lag(72), 2);
    }

    #[test]
    fn length_mismatch() {
        assert!(dm_test(&[1.0, 2.0], &[1.0], Loss::Squared, 0).is_err());
    }
}
