//! Shift-invariant pipeline: banded lifted least squares, completion, leading eigenpair.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{ReconDiagnostics, SpectrogramSamples};
use crate::error::{Error, Result};
use crate::linalg::{condition, hermitian_eigen, lstsq_real, svd_real};
use crate::signal::{phi, ComplexSignal, Grid, SisSpec};
use crate::spectrogram::a_coeff;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SisReconConfig {
    /// Products `c_k conj(c_j)` are fitted for `|k - j| <= D`, the largest `D` with `e^{-pi beta^2 D^2/4} >= band_tol`.
    pub band_tol: f64,
    /// Passes that subtract the predicted out-of-band contribution before refitting.
    pub corrections: usize,
    pub gn_iters: usize,
    pub max_cond: f64,
    pub max_gap: f64,
}

impl Default for SisReconConfig {
    fn default() -> Self {
        Self {
            band_tol: 1e-4,
            corrections: 3,
            gn_iters: 30,
            max_cond: 1e12,
            max_gap: 0.5,
        }
    }
}

/// Estimate of `G_{j,k} = c_k conj(c_j)` over `k_min..=k_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedGram {
    pub k_min: i64,
    pub g: DMatrix<C64>,
    /// Relative sample misfit of the completed matrix.
    pub residual: f64,
    /// Condition number of the equilibrated banded design.
    pub cond: f64,
    pub band: usize,
}

impl LiftedGram {
    pub fn entry(&self, j: i64, k: i64) -> C64 {
        self.g[((j - self.k_min) as usize, (k - self.k_min) as usize)]
    }

    /// `max |G - G^H|`.
    pub fn hermitian_defect(&self) -> f64 {
        let d = &self.g - self.g.adjoint();
        d.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

pub fn band_width(beta: f64, tol: f64) -> usize {
    (4.0 * (1.0 / tol).ln() / (PI * beta * beta)).sqrt().floor() as usize
}

/// `a(j,k,beta) M_{beta(j-k)/2} phi(w) T_{beta(j+k)/2} phi(x)`.
fn kernel(j: i64, k: i64, beta: f64, x: f64, w: f64) -> C64 {
    C64::from_polar(
        a_coeff(j, k, beta) * phi(w) * phi(x - beta * (j + k) as f64 / 2.0),
        PI * beta * (j - k) as f64 * w,
    )
}

fn predict(g: &DMatrix<C64>, k_min: i64, beta: f64, points: &[(f64, f64)]) -> Vec<f64> {
    let m = g.nrows();
    points
        .iter()
        .map(|&(x, w)| {
            let mut s = 0.0;
            for j in 0..m {
                for k in 0..m {
                    let v = g[(j, k)];
                    if v.re != 0.0 || v.im != 0.0 {
                        s += (v * kernel(k_min + j as i64, k_min + k as i64, beta, x, w)).re;
                    }
                }
            }
            s
        })
        .collect()
}

fn relative(pred: &[f64], y: &[f64]) -> f64 {
    let num: f64 = pred.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum();
    let den: f64 = y.iter().map(|q| q * q).sum();
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

/// Initial coefficients by propagating band entries outward from the largest diagonal entry.
fn propagate(gb: &DMatrix<C64>) -> DVector<C64> {
    let m = gb.nrows();
    let mut c = DVector::from_element(m, C64::new(0.0, 0.0));
    let p = (0..m).fold(0, |b, i| if gb[(i, i)].re > gb[(b, b)].re { i } else { b });
    c[p] = C64::new(gb[(p, p)].re.max(0.0).sqrt(), 0.0);
    for k in p + 1..m {
        c[k] = if c[k - 1].norm() > 0.0 { gb[(k - 1, k)] / c[k - 1].conj() } else { C64::new(0.0, 0.0) };
    }
    for k in (0..p).rev() {
        c[k] = if c[k + 1].norm() > 0.0 { (gb[(k, k + 1)] / c[k + 1]).conj() } else { C64::new(0.0, 0.0) };
    }
    c
}

/// Gauss-Newton fit of `c_k conj(c_j)` to the band entries.
fn fit_band(gb: &DMatrix<C64>, band: usize, mut c: DVector<C64>, iters: usize) -> DVector<C64> {
    let m = gb.nrows();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|j| (0..m).map(move |k| (j, k)))
        .filter(|(j, k)| j.abs_diff(*k) <= band)
        .collect();
    let np = pairs.len();
    for _ in 0..iters {
        let mut jac = DMatrix::<f64>::zeros(2 * np, 2 * m);
        let mut r = DVector::<f64>::zeros(2 * np);
        for (i, &(j, k)) in pairs.iter().enumerate() {
            let res = c[k] * c[j].conj() - gb[(j, k)];
            r[i] = res.re;
            r[np + i] = res.im;
            // d/d Re c_k = conj c_j, d/d Im c_k = i conj c_j, d/d Re c_j = c_k, d/d Im c_j = -i c_k.
            let entries = [
                (k, c[j].conj()),
                (m + k, C64::i() * c[j].conj()),
                (j, c[k]),
                (m + j, -C64::i() * c[k]),
            ];
            for (col, v) in entries {
                jac[(i, col)] += v.re;
                jac[(np + i, col)] += v.im;
            }
        }
        let d = lstsq_real(&jac, &(-r), 1e-13);
        for i in 0..m {
            c[i] += C64::new(d[i], d[m + i]);
        }
        if d.norm() < 1e-15 * c.norm() {
            break;
        }
    }
    c
}

/// Least-squares estimate of the lifted matrix on the index range, banded with out-of-band completion.
pub fn lift_sis_fit(
    samples: &SpectrogramSamples,
    beta: f64,
    index_range: (i64, i64),
    cfg: &SisReconConfig,
) -> Result<LiftedGram> {
    let (k_min, k_max) = index_range;
    if k_max < k_min {
        return Err(Error::InvalidParameter("empty index range".into()));
    }
    let m = (k_max - k_min + 1) as usize;
    let band = band_width(beta, cfg.band_tol).min(m - 1);
    let points = &samples.set.points;
    let y = &samples.values;
    if y.iter().all(|v| *v == 0.0) {
        return Ok(LiftedGram {
            k_min,
            g: DMatrix::zeros(m, m),
            residual: 0.0,
            cond: 1.0,
            band,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|j| (j..m).map(move |k| (j, k)))
        .filter(|(j, k)| k - j <= band)
        .collect();
    let nparams: usize = pairs.iter().map(|(j, k)| if j == k { 1 } else { 2 }).sum();
    if points.len() < nparams {
        return Err(Error::IllConditioned {
            cond: f64::INFINITY,
            advice: format!("{} samples for {nparams} real unknowns; use a denser sampling set", points.len()),
        });
    }
    let mut a = DMatrix::<f64>::zeros(points.len(), nparams);
    for (row, &(x, w)) in points.iter().enumerate() {
        let mut col = 0;
        for &(j, k) in &pairs {
            let kv = kernel(k_min + j as i64, k_min + k as i64, beta, x, w);
            if j == k {
                a[(row, col)] = kv.re;
                col += 1;
            } else {
                a[(row, col)] = 2.0 * kv.re;
                a[(row, col + 1)] = -2.0 * kv.im;
                col += 2;
            }
        }
    }
    let norms: Vec<f64> = (0..nparams).map(|c| a.column(c).norm()).collect();
    for (c, n) in norms.iter().enumerate() {
        if *n > 0.0 {
            a.column_mut(c).scale_mut(1.0 / n);
        }
    }
    let svd = svd_real(a);
    let cond = if norms.contains(&0.0) { f64::INFINITY } else { condition(&svd.s) };
    if cond > cfg.max_cond {
        return Err(Error::IllConditioned {
            cond,
            advice: "lifted design is rank deficient; use a denser sampling set".into(),
        });
    }
    let solve = |rhs: &DVector<f64>| -> DMatrix<C64> {
        let utb = svd.u.transpose() * rhs;
        let z = &svd.v * DVector::from_fn(svd.s.len(), |i, _| utb[i] / svd.s[i]);
        let mut gb = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
        let mut col = 0;
        for &(j, k) in &pairs {
            if j == k {
                gb[(j, j)] = C64::new(z[col] / norms[col], 0.0);
                col += 1;
            } else {
                let v = C64::new(z[col] / norms[col], z[col + 1] / norms[col + 1]);
                gb[(j, k)] = v;
                gb[(k, j)] = v.conj();
                col += 2;
            }
        }
        gb
    };

    let mut c: Option<DVector<C64>> = None;
    let mut gb = DMatrix::zeros(m, m);
    for _ in 0..cfg.corrections.max(1) {
        let mut rhs = DVector::from_column_slice(y);
        if let Some(cc) = &c {
            let mut outer = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
            for j in 0..m {
                for k in 0..m {
                    if j.abs_diff(k) > band {
                        outer[(j, k)] = cc[k] * cc[j].conj();
                    }
                }
            }
            for (r, v) in rhs.iter_mut().zip(predict(&outer, k_min, beta, points)) {
                *r -= v;
            }
        }
        gb = solve(&rhs);
        let start = c.take().unwrap_or_else(|| propagate(&gb));
        c = Some(fit_band(&gb, band, start, cfg.gn_iters));
    }
    let c = c.expect("at least one pass");
    let mut g = gb;
    for j in 0..m {
        for k in 0..m {
            if j.abs_diff(k) > band {
                g[(j, k)] = c[k] * c[j].conj();
            }
        }
    }
    let residual = relative(&predict(&g, k_min, beta, points), y);
    Ok(LiftedGram {
        k_min,
        g,
        residual,
        cond,
        band,
    })
}

/// Coefficients up to a global phase, normalized so the largest-modulus coefficient is real positive.
pub fn reconstruct_sis(
    samples: &SpectrogramSamples,
    beta: f64,
    index_range: (i64, i64),
    cfg: &SisReconConfig,
) -> Result<(SisSpec, ReconDiagnostics)> {
    let lifted = lift_sis_fit(samples, beta, index_range, cfg)?;
    let m = lifted.g.nrows();
    let sym = (&lifted.g + lifted.g.adjoint()) * C64::new(0.5, 0.0);
    let (vals, vecs) = hermitian_eigen(sym);
    let mut diag = ReconDiagnostics {
        condition_estimates: vec![lifted.cond],
        ..Default::default()
    };
    let l1 = vals[0];
    if !(l1 > 0.0) {
        diag.rank1_gap = Some(0.0);
        return Ok((SisSpec::new(beta, index_range.0, vec![C64::new(0.0, 0.0); m])?, diag));
    }
    let gap = if m > 1 { vals[1].max(0.0) / l1 } else { 0.0 };
    diag.rank1_gap = Some(gap);
    if gap > cfg.max_gap {
        return Err(Error::NotRankOne { gap });
    }
    // G_{j,k} = c_k conj(c_j), so the leading eigenvector is conj(c).
    let s = l1.sqrt();
    let mut coeffs: Vec<C64> = (0..m).map(|i| (vecs[(i, 0)] * s).conj()).collect();
    if let Some(mx) = coeffs.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())) {
        let u = mx.conj() / mx.norm();
        for v in &mut coeffs {
            *v *= u;
        }
    }
    let spec = SisSpec::new(beta, index_range.0, coeffs)?;
    let mut outer = DMatrix::from_element(m, m, C64::new(0.0, 0.0));
    for j in 0..m {
        for k in 0..m {
            outer[(j, k)] = spec.coeffs[k] * spec.coeffs[j].conj();
        }
    }
    diag.residual = relative(&predict(&outer, index_range.0, beta, &samples.set.points), &samples.values);
    Ok((spec, diag))
}

/// Reconstructs `f^` in the shift-invariant space with step `beta_hat` from samples of `|Gf|^2`,
/// using `|Gf(x, w)| = |Gf^(w, -x)|`.
pub fn reconstruct_sis_fourier(
    samples: &SpectrogramSamples,
    beta_hat: f64,
    index_range: (i64, i64),
    cfg: &SisReconConfig,
) -> Result<(SisSpec, ReconDiagnostics)> {
    let mut set = samples.set.clone();
    set.points = set.points.iter().map(|&(x, w)| (w, -x)).collect();
    set.theta -= FRAC_PI_2;
    let dual = SpectrogramSamples {
        set,
        values: samples.values.clone(),
        noise: samples.noise,
    };
    reconstruct_sis(&dual, beta_hat, index_range, cfg)
}

/// `f(t) = phi(t) sum_k d_k e^{2 pi i beta k t}`, the inverse Fourier transform of `sum_k d_k phi(w - beta k)`.
pub fn synthesize_fourier_dual(spec: &SisSpec, grid: Grid) -> ComplexSignal {
    ComplexSignal::from_fn(grid, |t| {
        let s: C64 = spec
            .indexed()
            .map(|(k, d)| d * C64::from_polar(1.0, 2.0 * PI * spec.beta * k as f64 * t))
            .sum();
        s * phi(t)
    })
}
