//! Weighted isotonic regression and the supply-curve step function it
//! produces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monotone non-decreasing step function from residual load (MW) to price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupplyCurve {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl SupplyCurve {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != levels.len() {
            return Err(Error::input(format!(
                "supply curve needs matching non-empty breakpoints and levels ({} vs {})",
                breakpoints.len(),
                levels.len()
            )));
        }
        if breakpoints.iter().chain(&levels).any(|v| !v.is_finite()) {
            return Err(Error::input("supply curve contains non-finite values"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("supply curve breakpoints must be strictly increasing"));
        }
        if levels.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::input("supply curve levels must be non-decreasing"));
        }
        Ok(SupplyCurve { breakpoints, levels })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    /// Right-continuous step evaluation with flat extrapolation on both sides.
    pub fn eval(&self, residual_load: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= residual_load);
        self.levels[idx.saturating_sub(1)]
    }

    /// Collapses runs of equal levels to their first breakpoint. Evaluation
    /// is unchanged.
    pub fn compressed(&self) -> SupplyCurve {
        let mut breakpoints = Vec::new();
        let mut levels: Vec<f64> = Vec::new();
        for (&b, &l) in self.breakpoints.iter().zip(&self.levels) {
            if levels.last() != Some(&l) {
                breakpoints.push(b);
                levels.push(l);
            }
        }
        SupplyCurve { breakpoints, levels }
    }
}

/// Convenience wrapper matching the other solvers' free-function style.
pub fn eval_supply_curve(curve: &SupplyCurve, residual_load: f64) -> f64 {
    curve.eval(residual_load)
}

struct Block {
    weight: f64,
    /// weighted sum of responses
    total: f64,
    len: usize,
}

impl Block {
    fn mean(&self) -> f64 {
        self.total / self.weight
    }
}

/// Weighted pool-adjacent-violators on responses already ordered by the
/// predictor. Returns one fitted level per input.
pub fn pava(y: &[f64], w: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<Block> = Vec::with_capacity(y.len());
    for (&yi, &wi) in y.iter().zip(w) {
        blocks.push(Block {
            weight: wi,
            total: wi * yi,
            len: 1,
        });
        while blocks.len() > 1 {
            let n = blocks.len();
            if blocks[n - 2].mean() > blocks[n - 1].mean() {
                let last = blocks.pop().expect("len > 1");
                let prev = blocks.last_mut().expect("len > 1");
                prev.weight += last.weight;
                prev.total += last.total;
                prev.len += last.len;
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(y.len());
    for b in &blocks {
        let m = b.mean();
        out.extend(std::iter::repeat(m).take(b.len));
    }
    out
}

/// Fits `min Σ kᵢ (f(xᵢ) − yᵢ)²` over non-decreasing `f`.
///
/// Zero-weight observations are dropped. Tied `x` values are pooled into
/// one point carrying the summed weight and the weighted-mean response.
pub fn fit_weighted_isotonic(x: &[f64], y: &[f64], k: &[f64]) -> Result<SupplyCurve> {
    if x.is_empty() || x.len() != y.len() || x.len() != k.len() {
        return Err(Error::input(format!(
            "isotonic inputs need equal non-zero lengths (x={}, y={}, k={})",
            x.len(),
            y.len(),
            k.len()
        )));
    }
    if x.iter().chain(y).chain(k).any(|v| !v.is_finite()) {
        return Err(Error::input("non-finite value in isotonic inputs"));
    }
    if k.iter().any(|&v| v < 0.0) {
        return Err(Error::input("isotonic weights must be non-negative"));
    }

    let mut idx: Vec<usize> = (0..x.len()).filter(|&i| k[i] > 0.0).collect();
    if idx.is_empty() {
        return Err(Error::input("all isotonic weights are zero"));
    }
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));

    let mut px: Vec<f64> = Vec::with_capacity(idx.len());
    let mut pw: Vec<f64> = Vec::with_capacity(idx.len());
    let mut ptotal: Vec<f64> = Vec::with_capacity(idx.len());
    for i in idx {
        if px.last() == Some(&x[i]) {
            *pw.last_mut().expect("non-empty") += k[i];
            *ptotal.last_mut().expect("non-empty") += k[i] * y[i];
        } else {
            px.push(x[i]);
            pw.push(k[i]);
            ptotal.push(k[i] * y[i]);
        }
    }
    let py: Vec<f64> = ptotal.iter().zip(&pw).map(|(t, w)| t / w).collect();
    let mut levels = pava(&py, &pw);
    // pooled means can wobble by an ulp across blocks; restore exact order
    for i in 1..levels.len() {
        if levels[i] < levels[i - 1] {
            levels[i] = levels[i - 1];
        }
    }
    SupplyCurve::new(px, levels)
}
