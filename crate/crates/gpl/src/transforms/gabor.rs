//! Gabor transform with the Gaussian window, closed forms and the cross-ambiguity function.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{phi, translate, ComplexSignal, Grid, ShiftMode, SisSpec};

/// Values on a product grid, row = x index, column = omega index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TFMatrix {
    pub x_grid: Grid,
    pub w_grid: Grid,
    values: Vec<C64>,
}

impl TFMatrix {
    pub fn new(x_grid: Grid, w_grid: Grid, values: Vec<C64>) -> Result<Self> {
        let expected = x_grid.count * w_grid.count;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self { x_grid, w_grid, values })
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.w_grid.count + j]
    }

    pub fn row(&self, i: usize) -> &[C64] {
        let m = self.w_grid.count;
        &self.values[i * m..(i + 1) * m]
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// `(x, omega, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, C64)> + '_ {
        let m = self.w_grid.count;
        self.values
            .iter()
            .enumerate()
            .map(move |(idx, v)| (self.x_grid.point(idx / m), self.w_grid.point(idx % m), *v))
    }
}

fn windowed(f: &ComplexSignal, x: f64) -> Vec<(f64, C64)> {
    let g = f.grid();
    f.values()
        .iter()
        .enumerate()
        .filter_map(|(i, v)| {
            let t = g.point(i);
            let w = phi(t - x);
            if w == 0.0 || (v.re == 0.0 && v.im == 0.0) {
                None
            } else {
                Some((t, v * w))
            }
        })
        .collect()
}

fn transform_windowed(q: &[(f64, C64)], w: f64, step: f64) -> C64 {
    let s: C64 = q
        .iter()
        .map(|(t, v)| v * C64::from_polar(1.0, -2.0 * PI * t * w))
        .sum();
    s * step
}

/// Rectangle-rule value of `int f(t) phi(t - x) e^{-2 pi i t w} dt`.
pub fn gabor_at(f: &ComplexSignal, x: f64, w: f64) -> C64 {
    transform_windowed(&windowed(f, x), w, f.grid().step)
}

/// Gabor transform on a product grid; rows are evaluated in parallel and are independent.
pub fn gabor(f: &ComplexSignal, x_grid: Grid, w_grid: Grid) -> TFMatrix {
    let step = f.grid().step;
    let values: Vec<C64> = (0..x_grid.count)
        .into_par_iter()
        .flat_map_iter(|i| {
            let q = windowed(f, x_grid.point(i));
            (0..w_grid.count)
                .map(|j| transform_windowed(&q, w_grid.point(j), step))
                .collect::<Vec<_>>()
        })
        .collect();
    TFMatrix {
        x_grid,
        w_grid,
        values,
    }
}

/// `(1/sqrt 2) e^{-pi i x w} e^{-pi (x^2 + w^2)/2}`.
pub fn gabor_gaussian_closed(x: f64, w: f64) -> C64 {
    C64::from_polar(FRAC_1_SQRT_2 * (-PI * (x * x + w * w) / 2.0).exp(), -PI * x * w)
}

/// `sum_k c_k e^{-2 pi i beta k w} G phi(x - beta k, w)`.
pub fn gabor_sis_series(spec: &SisSpec, x: f64, w: f64) -> C64 {
    spec.indexed()
        .map(|(k, c)| {
            let b = spec.beta * k as f64;
            c * C64::from_polar(1.0, -2.0 * PI * b * w) * gabor_gaussian_closed(x - b, w)
        })
        .sum()
}

/// `A(f,g)(x,w) = int f(t + x/2) conj(g(t - x/2)) e^{-2 pi i t w} dt`.
///
/// Evaluated as `e^{pi i x w} int f(s) conj(g(s - x)) e^{-2 pi i s w} ds` with a band-limited shift of `g`.
pub fn ambiguity(f: &ComplexSignal, g: &ComplexSignal, x: f64, w: f64) -> Result<C64> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid();
    let r = x / grid.step;
    let shifted = if (r - r.round()).abs() < 1e-12 {
        translate(g, x, ShiftMode::Grid)?
    } else {
        translate(g, x, ShiftMode::BandLimited)?
    };
    let s: C64 = f
        .values()
        .iter()
        .zip(shifted.values())
        .enumerate()
        .map(|(i, (a, b))| a * b.conj() * C64::from_polar(1.0, -2.0 * PI * grid.point(i) * w))
        .sum();
    Ok(s * grid.step * C64::from_polar(1.0, PI * x * w))
}
