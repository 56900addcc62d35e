//! Fourier transform `F f(nu) = int f(t) e^{-2 pi i t nu} dt` on uniform grids.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::signal::{ComplexSignal, Grid};

/// Unnormalized forward DFT `X_k = sum_n x_n e^{-2 pi i nk/N}`.
pub fn fft_inplace(buf: &mut [C64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// Inverse DFT with the `1/N` factor.
pub fn ifft_inplace(buf: &mut [C64]) {
    let n = buf.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(buf);
    let s = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= s;
    }
}

/// Frequency grid matched to a time grid: step `1/(count step)`, index origin at `-floor(count/2)`.
pub fn frequency_grid(g: &Grid) -> Grid {
    let n = g.count;
    let df = 1.0 / (n as f64 * g.step);
    Grid {
        start: -((n / 2) as f64) * df,
        step: df,
        count: n,
    }
}

/// Unitary transform onto [`frequency_grid`], computed by FFT with offset phase corrections.
pub fn fourier_grid(f: &ComplexSignal) -> ComplexSignal {
    let g = *f.grid();
    let n = g.count;
    let k0 = -((n / 2) as i64);
    let fg = frequency_grid(&g);
    let mut buf: Vec<C64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let r = ((i as i64 * k0).rem_euclid(n as i64)) as f64;
            v * C64::from_polar(1.0, -2.0 * PI * r / n as f64)
        })
        .collect();
    fft_inplace(&mut buf);
    // Output index k holds frequency index k0 + k.
    let values = buf
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            let nu = fg.point(k);
            v * C64::from_polar(g.step, -2.0 * PI * g.start * nu)
        })
        .collect();
    ComplexSignal::new(fg, values).expect("finite transform")
}

/// Quadrature `step * sum f(t_i) e^{sign 2 pi i t_i nu}`.
pub fn fourier_at(f: &ComplexSignal, nu: f64, sign: f64) -> C64 {
    let g = f.grid();
    let s: C64 = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| v * C64::from_polar(1.0, sign * 2.0 * PI * g.point(i) * nu))
        .sum();
    s * g.step
}

/// Direct quadrature of the transform (`sign = -1`) or its inverse (`sign = +1`) on `out`.
pub fn fourier_on(f: &ComplexSignal, out: Grid, sign: f64) -> ComplexSignal {
    ComplexSignal::from_fn(out, |nu| fourier_at(f, nu, sign))
}
