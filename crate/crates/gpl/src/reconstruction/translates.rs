//! Regularized inversion of Gaussian-translate correlation systems.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{condition, svd_real};
use crate::signal::{ComplexSignal, GaussianParams, Grid};

/// Tikhonov strength relative to `s_max^2`, and the truncated-SVD cutoff relative to `s_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegConfig {
    pub lambda_rel: f64,
    pub tsvd_cutoff: f64,
}

impl Default for RegConfig {
    fn default() -> Self {
        Self {
            lambda_rel: 1e-10,
            tsvd_cutoff: 1e-12,
        }
    }
}

/// Largest condition number accepted without regularization.
pub const UNREGULARIZED_MAX_COND: f64 = 1e15;

#[derive(Clone, Debug, PartialEq)]
pub struct TranslateSolution {
    pub signal: ComplexSignal,
    pub cond: f64,
    pub lambda: f64,
}

/// Minimizes `sum_n |<u, T_{x_n} phi_xi> - corr_n|^2 + lambda ||u||^2` over grid functions supported in
/// `support`; the grid-function inner product carries the step.
pub fn invert_gaussian_translates(
    correlations: &[(f64, C64)],
    xi: f64,
    grid: Grid,
    support: (f64, f64),
    reg: RegConfig,
) -> Result<TranslateSolution> {
    let tol = 1e-9 * grid.step;
    let idx: Vec<usize> = (0..grid.count)
        .filter(|&i| {
            let t = grid.point(i);
            t >= support.0 - tol && t <= support.1 + tol
        })
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); grid.count];
    if idx.is_empty() || correlations.is_empty() {
        return Ok(TranslateSolution {
            signal: ComplexSignal::new(grid, out)?,
            cond: 1.0,
            lambda: 0.0,
        });
    }
    let w = GaussianParams::window_product(xi);
    let a = DMatrix::from_fn(correlations.len(), idx.len(), |n, j| {
        grid.step * w.eval(grid.point(idx[j]) - correlations[n].0)
    });
    let svd = svd_real(a);
    let smax = svd.s[0];
    let cond = condition(&svd.s);
    if reg.lambda_rel <= 0.0 && cond > UNREGULARIZED_MAX_COND {
        return Err(Error::IllConditioned {
            cond,
            advice: "translate system needs lambda > 0".into(),
        });
    }
    let lambda = reg.lambda_rel.max(0.0) * smax * smax;
    let re = DVector::from_iterator(correlations.len(), correlations.iter().map(|c| c.1.re));
    let im = DVector::from_iterator(correlations.len(), correlations.iter().map(|c| c.1.im));
    let (ure, uim) = (svd.u.transpose() * re, svd.u.transpose() * im);
    let mut cre = DVector::zeros(svd.s.len());
    let mut cim = DVector::zeros(svd.s.len());
    for (i, &s) in svd.s.iter().enumerate() {
        if s > reg.tsvd_cutoff * smax && s > 0.0 {
            let filt = s / (s * s + lambda);
            cre[i] = ure[i] * filt;
            cim[i] = uim[i] * filt;
        }
    }
    let (xre, xim) = (&svd.v * cre, &svd.v * cim);
    for (j, &i) in idx.iter().enumerate() {
        out[i] = C64::new(xre[j], xim[j]);
    }
    Ok(TranslateSolution {
        signal: ComplexSignal::new(grid, out)?,
        cond,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes() -> Vec<f64> {
        (-16..=16).map(|n| n as f64).collect()
    }

    fn forward(u: &ComplexSignal, xi: f64) -> Vec<(f64, C64)> {
        let w = GaussianParams::window_product(xi);
        let g = u.grid();
        nodes()
            .into_iter()
            .map(|x| {
                let s: C64 = u.values().iter().enumerate().map(|(i, v)| v * w.eval(g.point(i) - x)).sum();
                (x, s * g.step)
            })
            .collect()
    }

    #[test]
    fn recovers_function_in_translate_span() {
        let grid = Grid::symmetric(0.5, 1.0 / 64.0).unwrap();
        for xi in [0.0, 0.25] {
            let w = GaussianParams::window_product(xi);
            // A combination of the informative translates, restricted to the support.
            let u = ComplexSignal::from_fn(grid, |t| {
                C64::new(w.eval(t) - 0.4 * w.eval(t - 1.0), 0.7 * w.eval(t + 1.0))
            });
            let sol = invert_gaussian_translates(&forward(&u, xi), xi, grid, (-0.5, 0.5), RegConfig::default()).unwrap();
            let err = sol.signal.sub(&u).unwrap().norm() / u.norm();
            assert!(err < 1e-3, "xi {xi}: {err}");
            assert!(sol.cond > 1e6);
        }
    }

    #[test]
    fn zero_correlations_give_zero() {
        let grid = Grid::symmetric(0.5, 1.0 / 64.0).unwrap();
        let c: Vec<(f64, C64)> = nodes().into_iter().map(|x| (x, C64::new(0.0, 0.0))).collect();
        let sol = invert_gaussian_translates(&c, 0.0, grid, (-0.5, 0.5), RegConfig::default()).unwrap();
        assert!(sol.signal.values().iter().all(|v| *v == C64::new(0.0, 0.0)));
    }

    #[test]
    fn norm_does_not_grow_with_lambda() {
        let grid = Grid::symmetric(0.5, 1.0 / 64.0).unwrap();
        let c: Vec<(f64, C64)> = nodes()
            .into_iter()
            .map(|x| (x, C64::new((-x * x / 3.0).exp(), 0.1 * x.sin())))
            .collect();
        let mut last = f64::INFINITY;
        let mut lam = 1e-12;
        while lam < 1e-2 {
            let reg = RegConfig {
                lambda_rel: lam,
                tsvd_cutoff: 1e-12,
            };
            let n = invert_gaussian_translates(&c, 0.1, grid, (-0.5, 0.4), reg).unwrap().signal.norm();
            assert!(n <= last * (1.0 + 1e-12));
            last = n;
            lam *= 2.0;
        }
    }

    #[test]
    fn refuses_unregularized_ill_conditioned_system() {
        let grid = Grid::symmetric(0.5, 1.0 / 64.0).unwrap();
        let c: Vec<(f64, C64)> = nodes().into_iter().map(|x| (x, C64::new(1.0, 0.0))).collect();
        let reg = RegConfig {
            lambda_rel: 0.0,
            tsvd_cutoff: 1e-12,
        };
        assert!(matches!(
            invert_gaussian_translates(&c, 0.0, grid, (-0.5, 0.5), reg),
            Err(Error::IllConditioned { .. })
        ));
    }
}
