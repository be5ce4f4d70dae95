//! Uniformly sampled lookup table with local cubic interpolation.

use rayon::prelude::*;

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CubicTable {
    lo: f64,
    hi: f64,
    step: f64,
    values: Vec<f64>,
}

impl CubicTable {
    /// Samples `f` at `points` equally spaced abscissae in `[lo, hi]`. A
    /// degenerate interval stores a single sample.
    pub fn build<F>(f: F, lo: f64, hi: f64, points: usize) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        ensure_finite("table lower bound", lo)?;
        ensure_finite("table upper bound", hi)?;
        if hi < lo {
            return Err(Error::invalid("table bounds", format!("[{lo}, {hi}] is empty")));
        }
        if hi - lo <= 1e-12 * lo.abs().max(1.0) {
            return Ok(Self { lo, hi: lo, step: 0.0, values: vec![f(lo)?] });
        }
        if points < 4 {
            return Err(Error::invalid("table points", "cubic interpolation needs at least 4 points"));
        }
        let step = (hi - lo) / (points - 1) as f64;
        let values = (0..points)
            .into_par_iter()
            .map(|k| f(if k + 1 == points { hi } else { lo + step * k as f64 }))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { lo, hi, step, values })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Four-point Lagrange interpolation; `None` outside the table.
    pub fn get(&self, x: f64) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        if self.values.len() == 1 {
            return Some(self.values[0]);
        }
        let n = self.values.len();
        let pos = (x - self.lo) / self.step;
        let i = (pos.floor() as usize).clamp(1, n - 3);
        let t = pos - i as f64;
        let [y0, y1, y2, y3] = [self.values[i - 1], self.values[i], self.values[i + 1], self.values[i + 2]];
        // nodes at t = -1, 0, 1, 2
        let l0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let l1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let l2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let l3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        Some(y0 * l0 + y1 * l1 + y2 * l2 + y3 * l3)
    }

    /// Largest interpolation error against `f` at the cell midpoints
    /// `lo + (k + ½)·step` for every `stride`-th cell.
    pub fn validate<F>(&self, f: F, stride: usize) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        if self.values.len() < 2 {
            return Ok((f(self.lo)? - self.values[0]).abs());
        }
        let cells = self.values.len() - 1;
        (0..cells)
            .step_by(stride.max(1))
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|k| {
                let x = self.lo + (k as f64 + 0.5) * self.step;
                Ok((f(x)? - self.get(x).unwrap()).abs())
            })
            .collect::<Result<Vec<f64>>>()
            .map(|errs| errs.into_iter().fold(0.0, f64::max))
    }
}
