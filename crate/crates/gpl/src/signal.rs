//! Grids, sampled signals, signal classes and the elementary operators.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transforms::fourier::{fft_inplace, ifft_inplace};

/// Default sampling step of the time axis.
pub const DEFAULT_STEP: f64 = 1.0 / 64.0;

/// Radius beyond which a unit Gaussian bump falls below 1e-16.
pub const TAIL_RADIUS: f64 = 3.424_8;

/// Margin added around Gaussian centers when building default grids.
pub const GRID_MARGIN: f64 = 4.0;

/// The window `e^{-pi t^2}`.
#[inline]
pub fn phi(t: f64) -> f64 {
    (-PI * t * t).exp()
}

/// Uniform grid `start + i * step`, `0 <= i < count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if count == 0 {
            return Err(Error::InvalidGrid("count must be at least 1".into()));
        }
        if !start.is_finite() {
            return Err(Error::InvalidGrid("start must be finite".into()));
        }
        Ok(Self { start, step, count })
    }

    /// Odd-length grid symmetric about zero that reaches at least `radius`.
    pub fn symmetric(radius: f64, step: f64) -> Result<Self> {
        let half = (radius / step - 1e-9).ceil().max(0.0) as usize;
        Self::new(-(half as f64) * step, step, 2 * half + 1)
    }

    /// Grid aligned to multiples of `step` covering `[lo, hi]`.
    pub fn covering(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(hi >= lo) {
            return Err(Error::InvalidGrid(format!("empty interval [{lo}, {hi}]")));
        }
        let i0 = (lo / step + 1e-9).floor() as i64;
        let i1 = (hi / step - 1e-9).ceil() as i64;
        Self::new(i0 as f64 * step, step, (i1 - i0 + 1) as usize)
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    pub fn last(&self) -> f64 {
        self.point(self.count - 1)
    }

    /// Index of a grid point within `tol * step` of `t`.
    pub fn index_of(&self, t: f64, tol: f64) -> Option<usize> {
        let r = (t - self.start) / self.step;
        let i = r.round();
        if (r - i).abs() > tol || i < 0.0 || i >= self.count as f64 {
            None
        } else {
            Some(i as usize)
        }
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let eps = 1e-9 * self.step;
        self.start <= lo + eps && self.last() >= hi - eps
    }
}

/// Complex samples on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexSignal {
    grid: Grid,
    values: Vec<C64>,
}

impl ComplexSignal {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::LengthMismatch {
                expected: grid.count,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.count],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..grid.count).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |t| C64::new(f(t), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        (self.grid.step * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `step * sum f conj(h)`.
    pub fn inner(&self, other: &ComplexSignal) -> Result<C64> {
        self.check_same_grid(other)?;
        let s: C64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.step)
    }

    pub fn scale(&self, a: C64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }

    pub fn sub(&self, other: &ComplexSignal) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &ComplexSignal) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    /// Supremum distance to another signal on the same grid.
    pub fn sup_dist(&self, other: &ComplexSignal) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn check_same_grid(&self, other: &ComplexSignal) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Shift interpretation for [`translate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ShiftMode {
    /// Integer index shift; zero fill at the edges.
    #[default]
    Grid,
    /// Periodic band-limited shift through the discrete Fourier transform.
    BandLimited,
}

/// `(T_tau f)(t) = f(t - tau)`.
pub fn translate(f: &ComplexSignal, tau: f64, mode: ShiftMode) -> Result<ComplexSignal> {
    let g = *f.grid();
    match mode {
        ShiftMode::Grid => {
            let r = tau / g.step;
            let k = r.round();
            if (r - k).abs() > 1e-9 {
                return Err(Error::ShiftNotAligned { tau, step: g.step });
            }
            let k = k as i64;
            let n = g.count as i64;
            let values = (0..n)
                .map(|i| {
                    let j = i - k;
                    if (0..n).contains(&j) {
                        f.values[j as usize]
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect();
            Ok(ComplexSignal { grid: g, values })
        }
        ShiftMode::BandLimited => {
            let n = g.count;
            let mut buf = f.values.clone();
            fft_inplace(&mut buf);
            let shift = tau / g.step;
            for (k, v) in buf.iter_mut().enumerate() {
                let kk = if 2 * k < n {
                    k as f64
                } else if 2 * k == n {
                    0.0
                } else {
                    k as f64 - n as f64
                };
                let mut factor = C64::from_polar(1.0, -2.0 * PI * kk * shift / n as f64);
                if 2 * k == n {
                    factor = C64::new((PI * shift).cos(), 0.0);
                }
                *v *= factor;
            }
            ifft_inplace(&mut buf);
            Ok(ComplexSignal { grid: g, values: buf })
        }
    }
}

/// Multiplies sample `i` by `e^{2 pi i nu t_i}`.
pub fn modulate(f: &ComplexSignal, nu: f64) -> ComplexSignal {
    let g = *f.grid();
    let values = f
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * C64::from_polar(1.0, 2.0 * PI * nu * g.point(i)))
        .collect();
    ComplexSignal { grid: g, values }
}

/// `t -> a e^{-b^2 (t - d)^2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

impl GaussianParams {
    pub fn new(a: f64, b: f64, d: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidParameter(format!("gaussian needs a, b > 0, got a={a}, b={b}")));
        }
        Ok(Self { a, b, d })
    }

    /// The window itself.
    pub fn window() -> Self {
        Self { a: 1.0, b: PI.sqrt(), d: 0.0 }
    }

    /// `e^{-pi w^2/2} e^{-2 pi (t - w/2)^2}`, the product of the window with its shift by `w`.
    pub fn window_product(w: f64) -> Self {
        Self {
            a: (-PI * w * w / 2.0).exp(),
            b: (2.0 * PI).sqrt(),
            d: w / 2.0,
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let u = self.b * (t - self.d);
        self.a * (-u * u).exp()
    }

    pub fn sample(&self, grid: Grid) -> ComplexSignal {
        ComplexSignal::from_real_fn(grid, |t| self.eval(t))
    }
}

/// Signals supported in `[-c/2, c/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactClassSpec {
    pub c: f64,
}

impl CompactClassSpec {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("support width must be positive, got {c}")));
        }
        Ok(Self { c })
    }

    pub fn support(&self) -> (f64, f64) {
        (-self.c / 2.0, self.c / 2.0)
    }

    /// Grid on the support whose end points are the support end points.
    pub fn grid(&self, step: f64) -> Result<Grid> {
        let n = (self.c / step).round() as usize;
        Grid::new(-self.c / 2.0, self.c / n as f64, n + 1)
    }

    pub fn default_grid(&self) -> Grid {
        self.grid(DEFAULT_STEP).expect("positive width")
    }

    /// The class records membership in L^4 as metadata; finite grids are in every L^p.
    pub fn lebesgue_exponent(&self) -> u32 {
        4
    }
}

/// Finitely supported element of the shift-invariant space with Gaussian generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SisSpec {
    pub beta: f64,
    pub k_min: i64,
    pub coeffs: Vec<C64>,
}

impl SisSpec {
    pub fn new(beta: f64, k_min: i64, coeffs: Vec<C64>) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter("coefficients must be finite".into()));
        }
        Ok(Self { beta, k_min, coeffs })
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, k: i64) -> C64 {
        if k < self.k_min || k > self.k_max() {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(k - self.k_min) as usize]
        }
    }

    pub fn indexed(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.k_min + i as i64, *c))
    }

    /// Range of centers `beta k` over nonzero coefficients.
    pub fn center_range(&self) -> Option<(f64, f64)> {
        let nz: Vec<f64> = self
            .indexed()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(k, _)| self.beta * k as f64)
            .collect();
        if nz.is_empty() {
            None
        } else {
            Some((nz[0], nz[nz.len() - 1]))
        }
    }

    /// Step-aligned grid reaching `GRID_MARGIN` past the outermost centers.
    pub fn default_grid(&self) -> Grid {
        let (lo, hi) = self.center_range().unwrap_or((0.0, 0.0));
        Grid::covering(lo - GRID_MARGIN, hi + GRID_MARGIN, DEFAULT_STEP).expect("finite centers")
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn scaled(&self, a: C64) -> Self {
        Self {
            beta: self.beta,
            k_min: self.k_min,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }
}

/// `sum_k c_k e^{-pi (t - beta k)^2}` on a grid wide enough for the tails.
pub fn synthesize_sis(spec: &SisSpec, grid: Grid) -> Result<ComplexSignal> {
    if let Some((lo, hi)) = spec.center_range() {
        let (need_lo, need_hi) = (lo - TAIL_RADIUS, hi + TAIL_RADIUS);
        if !grid.covers(need_lo, need_hi) {
            return Err(Error::GridTooNarrow {
                need_lo,
                need_hi,
                have_lo: grid.start,
                have_hi: grid.last(),
            });
        }
    }
    let terms: Vec<(f64, C64)> = spec
        .indexed()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, c)| (spec.beta * k as f64, c))
        .collect();
    Ok(ComplexSignal::from_fn(grid, |t| {
        terms.iter().map(|(center, c)| c * phi(t - center)).sum()
    }))
}

/// Random test-signal families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Smooth,
    Rough,
    Nonvanishing,
}

fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Plateau window on `[-1, 1]` in the normalized variable.
fn plateau(s: f64) -> f64 {
    (-14.0 * s.powi(6)).exp()
}

/// Seeded random member of the compact class sampled on `grid`.
///
/// The nonvanishing profile keeps `|f| >= 0.05 max|f|` for `|t| <= 0.3 c`.
pub fn random_compact(class: &CompactClassSpec, seed: u64, profile: Profile, grid: Grid) -> ComplexSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = class.c / 2.0;
    let inside = |t: f64| t.abs() <= half * (1.0 + 1e-12);
    match profile {
        Profile::Nonvanishing => {
            let mut cr = [0.3 * rng.sample::<f64, _>(StandardNormal), 0.3 * rng.sample::<f64, _>(StandardNormal)];
            let ci: [f64; 3] = std::array::from_fn(|_| 0.1 * rng.sample::<f64, _>(StandardNormal));
            let l1 = cr[0].abs() + cr[1].abs();
            if l1 > 0.6 {
                cr = [cr[0] * 0.6 / l1, cr[1] * 0.6 / l1];
            }
            ComplexSignal::from_fn(grid, |t| {
                if !inside(t) {
                    return C64::new(0.0, 0.0);
                }
                let s = t / half;
                let p = C64::new(1.0 + cr[0] * s + cr[1] * s * s, ci[0] + ci[1] * s + ci[2] * s * s);
                p * plateau(s)
            })
        }
        Profile::Smooth => {
            let z: Vec<C64> = (0..5).map(|m| complex_normal(&mut rng) / (1.0 + m as f64)).collect();
            ComplexSignal::from_fn(grid, |t| {
                if !inside(t) {
                    return C64::new(0.0, 0.0);
                }
                let s = t / half;
                let u: C64 = z
                    .iter()
                    .enumerate()
                    .map(|(m, zm)| zm * C64::from_polar(1.0, PI * (m as f64 - 2.0) * s))
                    .sum();
                u * plateau(s)
            })
        }
        Profile::Rough => {
            let values = grid
                .points()
                .into_iter()
                .map(|t| {
                    let z = complex_normal(&mut rng);
                    if inside(t) {
                        z
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect();
            ComplexSignal { grid, values }
        }
    }
}

/// Seeded random coefficients `c_{k_min}, ..., c_{k_min+len-1}` with `|c_k| <= 1`.
///
/// Smooth and nonvanishing profiles draw moduli in `[0.2, 1]`; rough draws them in `[0, 1]`.
pub fn random_sis(beta: f64, k_min: i64, len: usize, seed: u64, profile: Profile) -> Result<SisSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = match profile {
        Profile::Rough => 0.0,
        _ => 0.2,
    };
    let coeffs = (0..len)
        .map(|_| {
            let r: f64 = rng.random_range(lo..=1.0);
            let a: f64 = rng.random_range(-PI..PI);
            C64::from_polar(r, a)
        })
        .collect();
    SisSpec::new(beta, k_min, coeffs)
}

/// Distance modulo a global phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDistance {
    pub distance: f64,
    /// Unimodular `tau` minimizing `||f - tau h||`, when defined.
    pub tau: Option<C64>,
}

/// `min_{|tau|=1} ||f - tau h||_2`, attained at `tau = <f,h>/|<f,h>|`.
pub fn phase_distance(f: &ComplexSignal, h: &ComplexSignal) -> Result<PhaseDistance> {
    let ip = f.inner(h)?;
    if ip.norm() > 0.0 {
        let tau = ip / ip.norm();
        let distance = f.sub(&h.scale(tau))?.norm();
        Ok(PhaseDistance { distance, tau: Some(tau) })
    } else {
        let (nf, nh) = (f.norm(), h.norm());
        Ok(PhaseDistance {
            distance: (nf * nf + nh * nh).sqrt(),
            tau: None,
        })
    }
}

/// Phase distance divided by `||f||`; zero when both signals vanish.
pub fn relative_phase_distance(f: &ComplexSignal, h: &ComplexSignal) -> Result<f64> {
    let d = phase_distance(f, h)?.distance;
    let n = f.norm();
    Ok(if n > 0.0 { d / n } else { d })
}

/// Rotates the values so the largest-modulus entry is real positive, then snaps real and imaginary
/// parts to a dyadic lattice `2^-bits` relative to the largest modulus.
///
/// Phase-equivalent inputs agree after this map except when a component lies within rounding
/// distance of a lattice boundary.
pub fn canonical_phase(values: &[C64], bits: i32) -> Vec<C64> {
    let (imax, vmax) = match values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
    {
        Some((i, v)) if v.norm() > 0.0 => (i, *v),
        _ => return values.to_vec(),
    };
    let u = vmax.conj() / vmax.norm();
    let e = vmax.norm().log2().ceil() as i32;
    let q = 2f64.powi(e - bits);
    let snap = |x: f64| (x / q).round() * q;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if i == imax {
                C64::new(snap(vmax.norm()), 0.0)
            } else {
                let w = v * u;
                C64::new(snap(w.re), snap(w.im))
            }
        })
        .collect()
}
