use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standardized design matrix. `columns` maps each retained column back to
/// its index in the raw input.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: DMatrix<f64>,
    pub columns: Vec<usize>,
}

/// Per-column location and scale estimated on a training window. Columns
/// without variance are dropped at both fit and apply time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    n_inputs: usize,
    kept: Vec<usize>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn dropped(&self) -> Vec<usize> {
        (0..self.n_inputs).filter(|i| !self.kept.contains(i)).collect()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.n_inputs {
            return Err(Error::input(format!(
                "feature row has {} columns, standardizer expects {}",
                row.len(),
                self.n_inputs
            )));
        }
        Ok(self
            .kept
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&j, (m, s))| (row[j] - m) / s)
            .collect())
    }
}

/// Sample mean and standard deviation (denominator `M − 1`) per column.
pub fn fit_standardizer(x: &DMatrix<f64>) -> Result<Standardizer> {
    let (m, p) = x.shape();
    if m < 2 {
        return Err(Error::input(format!("standardizer needs at least 2 rows, got {m}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite value in feature matrix"));
    }
    let mut kept = Vec::new();
    let mut means = Vec::new();
    let mut stds = Vec::new();
    for (j, col) in x.column_iter().enumerate() {
        let mean = col.sum() / m as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m as f64 - 1.0);
        let sd = var.sqrt();
        if sd > 1e-12 * mean.abs().max(1.0) {
            kept.push(j);
            means.push(mean);
            stds.push(sd);
        }
    }
    Ok(Standardizer {
        n_inputs: p,
        kept,
        means,
        stds,
    })
}

pub fn apply_standardizer(s: &Standardizer, x: &DMatrix<f64>) -> Result<FeatureMatrix> {
    if x.ncols() != s.n_inputs {
        return Err(Error::input(format!(
            "feature matrix has {} columns, standardizer expects {}",
            x.ncols(),
            s.n_inputs
        )));
    }
    let values = DMatrix::from_fn(x.nrows(), s.kept.len(), |i, k| {
        (x[(i, s.kept[k])] - s.means[k]) / s.stds[k]
    });
    Ok(FeatureMatrix {
        values,
        columns: s.kept.clone(),
    })
}
