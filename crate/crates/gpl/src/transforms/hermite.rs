//! Hermite functions normalized in `L^2` under `e^{-pi t^2}` scaling.
//!
//! `h_0 = 2^{1/4} e^{-pi t^2}`, `h_1 = sqrt(2) x h_0` and
//! `h_{n+1} = sqrt(2/(n+1)) x h_n - sqrt(n/(n+1)) h_{n-1}` with `x = sqrt(2 pi) t`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{ComplexSignal, Grid};

/// Largest supported order.
pub const N_MAX: usize = 64;

/// Rows `h_0, ..., h_nmax` sampled on `grid`.
pub fn hermite_table(nmax: usize, grid: &Grid) -> Result<Vec<Vec<f64>>> {
    if nmax > N_MAX {
        return Err(Error::HermiteOrder { n: nmax, max: N_MAX });
    }
    let ts = grid.points();
    let s = (2.0 * PI).sqrt();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(nmax + 1);
    rows.push(ts.iter().map(|t| 2f64.powf(0.25) * (-PI * t * t).exp()).collect());
    if nmax >= 1 {
        rows.push(ts.iter().zip(&rows[0]).map(|(t, h)| 2f64.sqrt() * s * t * h).collect());
    }
    for n in 1..nmax {
        let a = (2.0 / (n as f64 + 1.0)).sqrt();
        let b = (n as f64 / (n as f64 + 1.0)).sqrt();
        let next = ts
            .iter()
            .enumerate()
            .map(|(i, t)| a * s * t * rows[n][i] - b * rows[n - 1][i])
            .collect();
        rows.push(next);
    }
    Ok(rows)
}

/// `h_n` sampled on `grid`.
pub fn hermite_eval(n: usize, grid: Grid) -> Result<ComplexSignal> {
    let mut rows = hermite_table(n, &grid)?;
    let row = rows.pop().expect("nonempty table");
    ComplexSignal::new(grid, row.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
}
