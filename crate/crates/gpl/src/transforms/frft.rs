//! Fractional Fourier transform, Hermite-diagonal and chirp forms.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::ComplexSignal;
use crate::transforms::fourier::fourier_on;
use crate::transforms::hermite::{hermite_table, N_MAX};

/// Rotation angle of the time-frequency plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationAngle(pub f64);

impl RotationAngle {
    pub fn theta(&self) -> f64 {
        self.0
    }

    /// True when the chirp factorization is usable without reduction.
    pub fn chirp_ok(&self, min_sin: f64) -> bool {
        self.0.sin().abs() >= min_sin
    }
}

/// `R_theta (x, w) = (x cos - w sin, x sin + w cos)`.
pub fn rotate(theta: f64, p: (f64, f64)) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    (c * p.0 - s * p.1, s * p.0 + c * p.1)
}

/// Minimum `|sin theta|` for direct chirp evaluation.
pub const CHIRP_MIN_SIN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrftMethod {
    Hermite,
    Chirp,
}

/// Truncated expansion `f ~ sum_{n <= N_MAX} <f, h_n> h_n`.
#[derive(Clone, Debug)]
pub struct HermiteExpansion {
    pub coeffs: Vec<C64>,
    /// `||f - sum <f,h_n> h_n|| / ||f||`.
    pub residual: f64,
    rows: Vec<Vec<f64>>,
}

pub fn hermite_expand(f: &ComplexSignal, nmax: usize) -> Result<HermiteExpansion> {
    let g = *f.grid();
    let rows = hermite_table(nmax, &g)?;
    let coeffs: Vec<C64> = rows
        .iter()
        .map(|h| f.values().iter().zip(h).map(|(v, hv)| v * *hv).sum::<C64>() * g.step)
        .collect();
    let mut rec = vec![C64::new(0.0, 0.0); g.count];
    for (a, h) in coeffs.iter().zip(&rows) {
        for (r, hv) in rec.iter_mut().zip(h) {
            *r += a * *hv;
        }
    }
    let err: f64 = f.values().iter().zip(&rec).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
    let nf = f.norm();
    let residual = if nf > 0.0 { (err * g.step).sqrt() / nf } else { 0.0 };
    Ok(HermiteExpansion { coeffs, residual, rows })
}

impl HermiteExpansion {
    /// `sum_n e^{-i theta n} <f,h_n> h_n` on the input grid.
    pub fn rotate(&self, grid: crate::signal::Grid, theta: f64) -> ComplexSignal {
        let mut out = vec![C64::new(0.0, 0.0); grid.count];
        for (n, (a, h)) in self.coeffs.iter().zip(&self.rows).enumerate() {
            let w = a * C64::from_polar(1.0, -theta * n as f64);
            for (o, hv) in out.iter_mut().zip(h) {
                *o += w * *hv;
            }
        }
        ComplexSignal::new(grid, out).expect("finite expansion")
    }
}

/// `F_theta f`, output on the input grid.
///
/// The chirp method reduces `theta = theta' + k pi/2` with `theta'` in `[pi/4, 3pi/4)` and applies
/// the Fourier transform `k mod 4` times before the chirp step.
pub fn frft(f: &ComplexSignal, theta: RotationAngle, method: FrftMethod) -> Result<ComplexSignal> {
    match method {
        FrftMethod::Hermite => Ok(hermite_expand(f, N_MAX)?.rotate(*f.grid(), theta.0)),
        FrftMethod::Chirp => {
            let k = ((theta.0 - FRAC_PI_4) / FRAC_PI_2).floor();
            let reduced = theta.0 - k * FRAC_PI_2;
            let g = *f.grid();
            let pre = match (k as i64).rem_euclid(4) {
                0 => f.clone(),
                1 => fourier_on(f, g, -1.0),
                2 => fourier_on(&fourier_on(f, g, -1.0), g, -1.0),
                _ => fourier_on(f, g, 1.0),
            };
            frft_chirp_unreduced(&pre, reduced)
        }
    }
}

/// `F_theta f(w) = sqrt(1 - i cot) u(w) F(u f)(w / sin)` with `u(t) = e^{i pi t^2 cot theta}`.
pub fn frft_chirp_unreduced(f: &ComplexSignal, theta: f64) -> Result<ComplexSignal> {
    let (s, c) = theta.sin_cos();
    if s.abs() < CHIRP_MIN_SIN {
        return Err(Error::ChirpSingular {
            theta,
            min: CHIRP_MIN_SIN,
        });
    }
    let cot = c / s;
    let g = *f.grid();
    let chirped: Vec<(f64, C64)> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let t = g.point(i);
            (t, v * C64::from_polar(1.0, PI * t * t * cot))
        })
        .collect();
    let amp = C64::new(1.0, -cot).sqrt();
    Ok(ComplexSignal::from_fn(g, |w| {
        let nu = w / s;
        let ft: C64 = chirped
            .iter()
            .map(|(t, v)| v * C64::from_polar(1.0, -2.0 * PI * t * nu))
            .sum::<C64>()
            * g.step;
        amp * C64::from_polar(1.0, PI * w * w * cot) * ft
    }))
}
