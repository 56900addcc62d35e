//! Cardinal-series interpolation of frequency slices and their Fourier transforms.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{translate, ComplexSignal, GaussianParams, ShiftMode};

/// Samples `g(k / 2c)` for `k = k_min, k_min + 1, ...` of a slice whose transform lives in `[-c, c]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShannonSlice {
    pub c: f64,
    pub k_min: i64,
    pub values: Vec<f64>,
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

impl ShannonSlice {
    pub fn new(c: f64, k_min: i64, values: Vec<f64>) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter(format!("band half-width must be positive, got {c}")));
        }
        Ok(Self { c, k_min, values })
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (2.0 * self.c)
    }

    pub fn node(&self, i: usize) -> f64 {
        (self.k_min + i as i64) as f64 * self.spacing()
    }

    /// Largest end sample relative to the largest sample, the truncation-error proxy.
    pub fn edge_ratio(&self) -> f64 {
        let max = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max == 0.0 || self.values.is_empty() {
            return 0.0;
        }
        let first = self.values[0].abs();
        let last = self.values[self.values.len() - 1].abs();
        first.max(last) / max
    }
}

/// Truncated cardinal series `sum_k g(k/2c) sinc(2c w - k)`.
pub fn shannon_interpolate(slice: &ShannonSlice, omega: f64) -> f64 {
    let r = 2.0 * slice.c * omega;
    let k = r.round();
    if (r - k).abs() < 1e-12 * r.abs().max(1.0) {
        let i = k as i64 - slice.k_min;
        return if (0..slice.values.len() as i64).contains(&i) { slice.values[i as usize] } else { 0.0 };
    }
    slice
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * sinc(r - (slice.k_min + i as i64) as f64))
        .sum()
}

/// Fourier transform at `xi` of the interpolated slice, `(1/2c) sum_k g_k e^{-2 pi i xi w_k}` inside the band.
pub fn freq_correlation(slice: &ShannonSlice, xi: f64) -> C64 {
    let c = slice.c;
    let edge = 1e-12 * c.max(1.0);
    if xi.abs() > c + edge {
        return C64::new(0.0, 0.0);
    }
    let weight = if (xi.abs() - c).abs() <= edge { 0.5 } else { 1.0 };
    let d = slice.spacing();
    let s: C64 = slice
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * C64::from_polar(1.0, -2.0 * PI * xi * slice.node(i)))
        .sum();
    s * d * weight
}

/// Quadrature of `<f_xi, T_x phi_xi>` with `f_xi(t) = f(t - xi) conj(f(t))`; `xi` must be grid-aligned.
pub fn correlation_direct(f: &ComplexSignal, x: f64, xi: f64) -> Result<C64> {
    let g = *f.grid();
    let shifted = translate(f, xi, ShiftMode::Grid)?;
    let w = GaussianParams::window_product(xi);
    let s: C64 = shifted
        .values()
        .iter()
        .zip(f.values())
        .enumerate()
        .map(|(i, (a, b))| a * b.conj() * w.eval(g.point(i) - x))
        .sum();
    Ok(s * g.step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{phi, random_compact, CompactClassSpec, Grid, Profile};
    use crate::transforms::gabor::gabor_at;

    fn gauss_slice(c: f64, n: i64) -> ShannonSlice {
        let d = 1.0 / (2.0 * c);
        let values = (-n..=n).map(|k| 0.5 * phi(k as f64 * d)).collect();
        ShannonSlice::new(c, -n, values).unwrap()
    }

    #[test]
    fn interpolation_examples() {
        let s = gauss_slice(1.0, 12);
        for i in 0..s.values.len() {
            assert_eq!(shannon_interpolate(&s, s.node(i)), s.values[i]);
        }
        let truth = 0.5 * (-PI / 16.0).exp();
        // At spacing 1/4 the aliased mass is below e^{-16 pi}.
        let fine = gauss_slice(2.0, 24);
        assert!((shannon_interpolate(&fine, 0.25) - truth).abs() < 1e-6);
        // At spacing 1/2 the Gaussian slice is not band-limited enough and aliasing shows.
        let coarse = shannon_interpolate(&s, 0.25);
        assert!((coarse - truth).abs() > 1e-3);
        let z = ShannonSlice::new(1.0, -3, vec![0.0; 7]).unwrap();
        assert_eq!(shannon_interpolate(&z, 0.3), 0.0);
    }

    #[test]
    fn gaussian_correlation_at_origin() {
        let s = gauss_slice(16.0, 16 * 32);
        let v = freq_correlation(&s, 0.0);
        assert!((v.re - 0.5).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    fn slice_of(f: &ComplexSignal, x: f64, c: f64, n: i64) -> ShannonSlice {
        let d = 1.0 / (2.0 * c);
        let values = (-n..=n).map(|k| gabor_at(f, x, k as f64 * d).norm_sqr()).collect();
        ShannonSlice::new(c, -n, values).unwrap()
    }

    #[test]
    fn correlation_vanishes_outside_band() {
        let class = CompactClassSpec::new(2.0).unwrap();
        let f = random_compact(&class, 2, Profile::Smooth, class.default_grid());
        let s = slice_of(&f, 0.0, 2.0, 48);
        for xi in [2.125, -2.5, 3.0] {
            assert!(freq_correlation(&s, xi).norm() < 1e-9);
            assert!(correlation_direct(&f, 0.0, xi).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn correlation_matches_direct_quadrature() {
        let class = CompactClassSpec::new(2.0).unwrap();
        for seed in 0..3 {
            let f = random_compact(&class, seed, Profile::Smooth, class.default_grid());
            for x in [0.0, 1.0, -1.0] {
                let s = slice_of(&f, x, 2.0, 48);
                for xi in [0.0, 0.25, -0.5, 1.25, 1.9375] {
                    let a = freq_correlation(&s, xi);
                    let b = correlation_direct(&f, x, xi).unwrap();
                    assert!((a - b).norm() < 1e-8, "seed {seed} x {x} xi {xi}: {}", (a - b).norm());
                }
            }
        }
    }

    #[test]
    fn zero_lag_is_weighted_energy() {
        let f = ComplexSignal::from_real_fn(Grid::symmetric(1.0, 1.0 / 64.0).unwrap(), |t| 1.0 - t * t);
        let v = correlation_direct(&f, 0.0, 0.0).unwrap();
        let e: f64 = f
            .values()
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * phi(f.grid().point(i)).powi(2))
            .sum::<f64>()
            / 64.0;
        assert!((v.re - e).abs() < 1e-14 && v.im == 0.0);
    }
}
