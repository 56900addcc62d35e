//! Closed-form spectrograms of shift-invariant signals, their slice expansions, and the band and
//! periodicity facts used by the reconstruction pipelines.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{phi, CompactClassSpec, ComplexSignal, SisSpec};
use crate::transforms::fourier::fft_inplace;

/// `a(j,k,beta) = e^{-pi beta^2 (k-j)^2 / 4} / 2`.
pub fn a_coeff(j: i64, k: i64, beta: f64) -> f64 {
    let d = (k - j) as f64;
    0.5 * (-PI * beta * beta * d * d / 4.0).exp()
}

/// `M_nu phi(w) = e^{2 pi i nu w} e^{-pi w^2}`.
fn mod_phi(nu: f64, w: f64) -> C64 {
    C64::from_polar(phi(w), 2.0 * PI * nu * w)
}

/// `|Gf(x,w)|^2 = sum_k sum_j c_k conj(c_j) a(j,k,beta) M_{beta(j-k)/2} phi(w) T_{beta(j+k)/2} phi(x)`.
pub fn spectrogram_sis_closed(spec: &SisSpec, x: f64, w: f64) -> Result<f64> {
    let beta = spec.beta;
    let mut total = C64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (k, ck) in spec.indexed() {
        for (j, cj) in spec.indexed() {
            let term = ck
                * cj.conj()
                * a_coeff(j, k, beta)
                * mod_phi(beta * (j - k) as f64 / 2.0, w)
                * phi(x - beta * (j + k) as f64 / 2.0);
            scale += term.norm();
            total += term;
        }
    }
    if total.im.abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::Consistency(format!(
            "imaginary residue {:.3e} in spectrogram double sum",
            total.im
        )));
    }
    Ok(total.re)
}

/// Which coordinate is held fixed in a slice expansion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceAxis {
    /// `A_n`: frequency fixed, expansion in `T_{beta n/2} phi(x)`.
    Omega(f64),
    /// `B_n`: time fixed, expansion in `M_{beta n/2} phi(w)`.
    X(f64),
}

/// Slice sequence indexed `n_min, n_min + 1, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceCoeffs {
    pub fixed: SliceAxis,
    pub beta: f64,
    pub n_min: i64,
    pub values: Vec<C64>,
}

impl SliceCoeffs {
    /// Spectrogram value at the free coordinate.
    pub fn eval(&self, free: f64) -> f64 {
        let beta = self.beta;
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let n = (self.n_min + i as i64) as f64;
                match self.fixed {
                    SliceAxis::Omega(_) => v * phi(free - beta * n / 2.0),
                    SliceAxis::X(_) => v * mod_phi(beta * n / 2.0, free),
                }
            })
            .sum::<C64>()
            .re
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }

    pub fn get(&self, n: i64) -> C64 {
        let i = n - self.n_min;
        if i < 0 || i as usize >= self.values.len() {
            C64::new(0.0, 0.0)
        } else {
            self.values[i as usize]
        }
    }
}

/// `A_n = sum_{j+k=n} c_k conj(c_j) a M_{beta(j-k)/2} phi(w)` or
/// `B_n = sum_{j-k=n} c_k conj(c_j) a T_{beta(j+k)/2} phi(x)`.
pub fn slice_coeffs(spec: &SisSpec, fixed: SliceAxis) -> SliceCoeffs {
    let beta = spec.beta;
    let m = spec.coeffs.len() as i64;
    let (n_min, len) = match fixed {
        SliceAxis::Omega(_) => (2 * spec.k_min, (2 * m - 1).max(1) as usize),
        SliceAxis::X(_) => (-(m - 1), (2 * m - 1).max(1) as usize),
    };
    let mut values = vec![C64::new(0.0, 0.0); len];
    for (k, ck) in spec.indexed() {
        for (j, cj) in spec.indexed() {
            let base = ck * cj.conj() * a_coeff(j, k, beta);
            let (n, factor) = match fixed {
                SliceAxis::Omega(w) => (j + k, mod_phi(beta * (j - k) as f64 / 2.0, w)),
                SliceAxis::X(x) => (j - k, C64::new(phi(x - beta * (j + k) as f64 / 2.0), 0.0)),
            };
            values[(n - n_min) as usize] += base * factor;
        }
    }
    SliceCoeffs {
        fixed,
        beta,
        n_min,
        values,
    }
}

/// Frequencies beyond this bound use the expansion with `phi(w)` cancelled symbolically.
pub const RATIO_OMEGA_CAP: f64 = 12.0;

/// `|Gf(x,w)|^2 / phi(w)`, a `2/beta`-periodic function of `w`.
pub fn periodized_ratio(spec: &SisSpec, x: f64, w: f64) -> f64 {
    if w.abs() <= RATIO_OMEGA_CAP {
        if let Ok(v) = spectrogram_sis_closed(spec, x, w) {
            return v / phi(w);
        }
    }
    // M_{beta n/2} phi(w) / phi(w) = e^{pi i beta n w}.
    let b = slice_coeffs(spec, SliceAxis::X(x));
    b.values
        .iter()
        .enumerate()
        .map(|(i, v)| v * C64::from_polar(1.0, PI * spec.beta * (b.n_min + i as i64) as f64 * w))
        .sum::<C64>()
        .re
}

/// Fourier content of a frequency slice of the spectrogram.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub x: f64,
    pub c: f64,
    /// Fraction of the slice's spectral energy at lags `|xi| > c`.
    pub out_of_band: f64,
    /// Largest lag carrying energy above `1e-30` of the total.
    pub max_lag: f64,
    pub pass: bool,
}

/// Relative out-of-band tolerance for [`freq_band_check`].
pub const BAND_TOL: f64 = 1e-9;

/// Transforms `w -> |Gf(x,w)|^2` and measures its energy outside `[-c, c]`.
///
/// On a grid with step `h` the slice is a trigonometric polynomial in `w` with lags in `h Z`,
/// periodic with period `1/h`; one period is sampled densely enough that the FFT is exact.
pub fn freq_band_check(f: &ComplexSignal, class: &CompactClassSpec, x: f64) -> BandReport {
    let g = f.grid();
    let h = g.step;
    let q: Vec<(usize, C64)> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v * phi(g.point(i) - x)))
        .filter(|(_, v)| v.norm() > 0.0)
        .collect();
    if q.is_empty() {
        return BandReport {
            x,
            c: class.c,
            out_of_band: 0.0,
            max_lag: 0.0,
            pass: true,
        };
    }
    let i0 = q[0].0;
    let span = q[q.len() - 1].0 - i0 + 1;
    let l = (2 * span).next_power_of_two();
    // Slice samples at w_k = k/(l h); the grid offset only contributes a unimodular factor.
    let mut padded = vec![C64::new(0.0, 0.0); l];
    for (i, v) in &q {
        padded[i - i0] = *v * h;
    }
    fft_inplace(&mut padded);
    let mut slice: Vec<C64> = padded.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
    fft_inplace(&mut slice);
    let mut total = 0.0;
    let mut out = 0.0;
    let mut energies = Vec::with_capacity(l);
    for (m, v) in slice.iter().enumerate() {
        let lag = if m <= l / 2 { m as f64 } else { m as f64 - l as f64 } * h;
        let e = v.norm_sqr();
        total += e;
        if lag.abs() > class.c + 0.5 * h {
            out += e;
        }
        energies.push((lag, e));
    }
    let max_lag = energies
        .iter()
        .filter(|(_, e)| *e > 1e-30 * total)
        .map(|(lag, _)| lag.abs())
        .fold(0.0, f64::max);
    let out_of_band = if total > 0.0 { out / total } else { 0.0 };
    BandReport {
        x,
        c: class.c,
        out_of_band,
        max_lag,
        pass: out_of_band < BAND_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{random_compact, synthesize_sis, Grid, Profile};
    use crate::transforms::gabor::{gabor_at, gabor_sis_series};

    fn spec3() -> SisSpec {
        SisSpec::new(
            2f64.sqrt(),
            -1,
            vec![C64::new(1.0, 0.0), C64::new(0.5, -0.3), C64::new(-0.2, 0.0)],
        )
        .unwrap()
    }

    #[test]
    fn a_coeff_examples() {
        for k in [-3, 0, 5] {
            for beta in [0.5, 1.0, 2f64.sqrt()] {
                assert_eq!(a_coeff(k, k, beta), 0.5);
            }
        }
        assert!((a_coeff(1, 0, 1.0) - 0.5 * (-PI / 4.0).exp()).abs() < 1e-16);
        assert!((a_coeff(1, 0, 1.0) - 0.227971).abs() < 5e-6);
        assert_eq!(a_coeff(2, -1, 1.3), a_coeff(-1, 2, 1.3));
    }

    #[test]
    fn single_term_closed_form() {
        let spec = SisSpec::new(1.0, 0, vec![C64::new(1.0, 0.0)]).unwrap();
        assert!((spectrogram_sis_closed(&spec, 0.0, 0.0).unwrap() - 0.5).abs() < 1e-16);
        let v = spectrogram_sis_closed(&spec, 0.7, -0.4).unwrap();
        assert!((v - 0.5 * (-PI * (0.49 + 0.16)).exp()).abs() < 1e-16);
        let zero = SisSpec::new(1.0, 0, vec![C64::new(0.0, 0.0); 3]).unwrap();
        assert_eq!(spectrogram_sis_closed(&zero, 0.3, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_equals_series_modulus() {
        let spec = spec3();
        for &(x, w) in &[(0.0, 0.0), (1.2, -0.7), (-2.0, 1.5), (0.3, 2.2)] {
            let a = spectrogram_sis_closed(&spec, x, w).unwrap();
            let b = gabor_sis_series(&spec, x, w).norm_sqr();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let coeffs: Vec<C64> = (0..9).map(|k| C64::from_polar(1.0 - 0.08 * k as f64, 1.3 * k as f64)).collect();
        let spec = SisSpec::new(1.0, -4, coeffs).unwrap();
        let f = synthesize_sis(&spec, spec.default_grid()).unwrap();
        let (mut num, mut den): (f64, f64) = (0.0, 0.0);
        for i in 0..17 {
            for j in 0..17 {
                let (x, w) = (-4.0 + 0.5 * i as f64, -4.0 + 0.5 * j as f64);
                let e = spectrogram_sis_closed(&spec, x, w).unwrap();
                num = num.max((gabor_at(&f, x, w).norm_sqr() - e).abs());
                den = den.max(e);
            }
        }
        assert!(num / den < 1e-8);
    }

    #[test]
    fn slice_examples() {
        let single = SisSpec::new(1.0, 0, vec![C64::new(1.0, 0.0)]).unwrap();
        let a = slice_coeffs(&single, SliceAxis::Omega(0.0));
        assert_eq!(a.values.len(), 1);
        assert_eq!(a.get(0), C64::new(0.5, 0.0));
        let b = slice_coeffs(&single, SliceAxis::X(0.4));
        assert_eq!(b.values.len(), 1);
        assert_eq!(b.n_min, 0);

        let spec = spec3();
        let l1 = spec.l1_norm();
        for w in [0.0, 0.5, -1.3] {
            let a = slice_coeffs(&spec, SliceAxis::Omega(w));
            assert!(a.l1_norm() <= phi(w) * l1 * l1 + 1e-15);
        }
    }

    #[test]
    fn slice_forms_reproduce_closed_form() {
        let spec = spec3();
        for &(x, w) in &[(0.1, 0.2), (-1.7, 0.9), (2.4, -1.1)] {
            let v = spectrogram_sis_closed(&spec, x, w).unwrap();
            let a = slice_coeffs(&spec, SliceAxis::Omega(w)).eval(x);
            let b = slice_coeffs(&spec, SliceAxis::X(x)).eval(w);
            assert!((a - v).abs() < 1e-10 && (b - v).abs() < 1e-10);
        }
    }

    #[test]
    fn ratio_examples() {
        let spec = spec3();
        let p = 2.0 / spec.beta;
        for &(x, w) in &[(0.3, 0.1), (-1.0, 2.5), (1.7, -0.4)] {
            let r0 = periodized_ratio(&spec, x, w);
            assert!((r0 - periodized_ratio(&spec, x, w + p)).abs() < 1e-9);
            let r1 = periodized_ratio(&spec.scaled(C64::new(2.0, 0.0)), x, w);
            assert!((r1 - 4.0 * r0).abs() < 1e-12 * r1.abs().max(1.0));
        }
        let single = SisSpec::new(1.0, 0, vec![C64::new(1.0, 0.0)]).unwrap();
        for w in [0.0, 3.0, 20.0] {
            assert!((periodized_ratio(&single, 0.6, w) - 0.5 * phi(0.6)).abs() < 1e-14);
        }
    }

    #[test]
    fn ratio_continuous_across_cap() {
        let spec = spec3();
        let below = periodized_ratio(&spec, 0.4, RATIO_OMEGA_CAP - 1e-9);
        let above = periodized_ratio(&spec, 0.4, RATIO_OMEGA_CAP + 1e-9);
        assert!((below - above).abs() < 1e-9);
    }

    #[test]
    fn band_check_cases() {
        let class = CompactClassSpec::new(2.0).unwrap();
        let grid = Grid::symmetric(2.0, 1.0 / 64.0).unwrap();
        let f = random_compact(&class, 4, Profile::Rough, grid);
        for x in [0.0, 1.0, -2.0] {
            let r = freq_band_check(&f, &class, x);
            assert!(r.pass && r.out_of_band < 1e-9, "{r:?}");
            assert!(r.max_lag <= 2.0 + 1e-12);
        }
        let z = ComplexSignal::zeros(grid);
        assert!(freq_band_check(&z, &class, 0.0).pass);

        // Support [-1, 1] checked against the class with support [-1/2, 1/2].
        let narrow = CompactClassSpec::new(1.0).unwrap();
        let r = freq_band_check(&f, &narrow, 0.0);
        assert!(!r.pass, "{r:?}");
        assert!(r.max_lag > 1.0 && r.max_lag <= 2.0 + 1e-12);
    }
}
