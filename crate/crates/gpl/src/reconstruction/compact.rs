//! Compact-support pipeline: slice interpolation, correlations, translate inversion, phase
//! propagation, then a least-squares refinement on the intensity misfit.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::shannon::{freq_correlation, ShannonSlice};
use super::translates::{invert_gaussian_translates, RegConfig};
use super::{ReconDiagnostics, SpectrogramSamples};
use crate::error::{Error, Result};
use crate::linalg::svd_complex;
use crate::signal::{phi, CompactClassSpec, ComplexSignal, Grid, DEFAULT_STEP};
use crate::transforms::frft::{frft, FrftMethod, RotationAngle};

/// How phases are propagated from the recovered correlations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    /// Every point from the single anchor `p = argmax |f|^2`.
    #[default]
    Anchor,
    /// Shortest-lag spanning tree over point pairs with `|f(t) f(t')|^2` above `1e-4 max^2`.
    SpanningTree,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompactReconConfig {
    pub step: f64,
    pub reg: RegConfig,
    pub phase_mode: PhaseMode,
    /// Average the propagated values over all strong anchors.
    pub average: bool,
    /// Anchor rejected when `|f(p)|^2` is below this fraction of the mean energy density.
    pub anchor_threshold: f64,
    pub refine: bool,
    /// `s / s_max` thresholds defining the nested refinement subspaces.
    pub subspace_thresholds: Vec<f64>,
    pub starts_per_batch: usize,
    pub max_batches: usize,
    pub accept_residual: f64,
    pub first_level_iters: usize,
    pub later_level_iters: usize,
    pub seed: u64,
    /// Half-width of the grid carrying the un-rotated output for rotated sets.
    pub rotation_radius: f64,
}

impl Default for CompactReconConfig {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            reg: RegConfig::default(),
            phase_mode: PhaseMode::Anchor,
            average: false,
            anchor_threshold: 1e-6,
            refine: true,
            subspace_thresholds: vec![1e-1, 3e-3, 3e-5],
            starts_per_batch: 32,
            max_batches: 10,
            accept_residual: 1e-8,
            first_level_iters: 200,
            later_level_iters: 300,
            seed: 0,
            rotation_radius: 4.0,
        }
    }
}

/// Forward matrix `G_{ji} = h phi(t_i - x_j) e^{-2 pi i t_i w_j}` over the unrotated points.
fn forward_matrix(samples: &SpectrogramSamples, grid: &Grid) -> DMatrix<C64> {
    let n = samples.len();
    DMatrix::from_fn(n, grid.count, |j, i| {
        let (x, w) = samples.set.unrotated(j);
        let t = grid.point(i);
        C64::from_polar(grid.step * phi(t - x), -2.0 * PI * t * w)
    })
}

fn intensities(g: &DMatrix<C64>, u: &DVector<C64>) -> Vec<f64> {
    (g * u).iter().map(|v| v.norm_sqr()).collect()
}

fn misfit(y: &[f64], pred: &[f64]) -> f64 {
    pred.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Levenberg-Marquardt on `sum_j (|(B a)_j|^2 - y_j)^2` in real coordinates.
fn lm(bz: &DMatrix<C64>, y: &[f64], a0: DVector<C64>, iters: usize) -> DVector<C64> {
    let k = bz.ncols();
    let n = bz.nrows();
    let mut a = a0;
    let mut lam = 1e-3;
    for _ in 0..iters {
        let g = bz * &a;
        let r: DVector<f64> = DVector::from_iterator(n, g.iter().zip(y).map(|(v, q)| v.norm_sqr() - q));
        let cost = r.norm_squared();
        let mut j = DMatrix::<f64>::zeros(n, 2 * k);
        for row in 0..n {
            let cg = g[row].conj() * 2.0;
            for col in 0..k {
                let d = cg * bz[(row, col)];
                j[(row, col)] = d.re;
                j[(row, k + col)] = -d.im;
            }
        }
        let jtj = j.tr_mul(&j);
        let sc = jtj.trace() / (2 * k) as f64;
        let grad = j.tr_mul(&r);
        let mut accepted = None;
        while lam < 1e12 {
            let mut h = jtj.clone();
            for i in 0..2 * k {
                h[(i, i)] += lam * sc;
            }
            let step = match h.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lam *= 4.0;
                    continue;
                }
            };
            let an = DVector::from_fn(k, |i, _| a[i] + C64::new(step[i], step[k + i]));
            let cn: f64 = (bz * &an).iter().zip(y).map(|(v, q)| (v.norm_sqr() - q).powi(2)).sum();
            if cn < cost {
                a = an;
                lam = (lam / 3.0).max(1e-15);
                accepted = Some(cn);
                break;
            }
            lam *= 4.0;
        }
        match accepted {
            Some(cn) if (cost - cn).abs() >= 1e-14 * cost => {}
            _ => break,
        }
    }
    a
}

struct Refinement {
    u: DVector<C64>,
    residual: f64,
    batches: usize,
}

fn refine(g: &DMatrix<C64>, y: &[f64], start: Option<&DVector<C64>>, cfg: &CompactReconConfig) -> Refinement {
    let svd = svd_complex(g.clone());
    let smax = svd.s[0];
    let mut levels: Vec<usize> = cfg
        .subspace_thresholds
        .iter()
        .map(|th| svd.s.iter().filter(|s| **s >= th * smax).count().max(1))
        .collect();
    levels.dedup();
    let bases: Vec<DMatrix<C64>> = levels.iter().map(|&k| svd.v.columns(0, k).into_owned()).collect();
    let bzs: Vec<DMatrix<C64>> = bases.iter().map(|b| g * b).collect();
    let ysq: f64 = y.iter().map(|v| v * v).sum();
    let ysum: f64 = y.iter().sum();
    let rel = |u: &DVector<C64>| (misfit(y, &intensities(g, u)) / ysq).sqrt();

    let k1 = levels[0];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(f64, DVector<C64>)> = None;
    let mut fin: Option<(f64, DVector<C64>)> = None;
    let mut batches = 0;
    for batch in 0..cfg.max_batches.max(1) {
        batches = batch + 1;
        let mut starts: Vec<DVector<C64>> = Vec::with_capacity(cfg.starts_per_batch + 1);
        if batch == 0 {
            if let Some(u) = start {
                starts.push(bases[0].adjoint() * u);
            }
        }
        for _ in 0..cfg.starts_per_batch {
            let a0 = DVector::from_fn(k1, |_, _| {
                C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            });
            let e: f64 = (&bzs[0] * &a0).iter().map(|v| v.norm_sqr()).sum();
            let s = if e > 0.0 { (ysum / e).sqrt() } else { 1.0 };
            starts.push(a0 * C64::new(s, 0.0));
        }
        for a0 in starts {
            let a = lm(&bzs[0], y, a0, cfg.first_level_iters);
            let u = &bases[0] * a;
            let r = rel(&u);
            if best.as_ref().is_none_or(|b| r < b.0) {
                best = Some((r, u));
            }
        }
        let mut u = best.as_ref().expect("at least one start").1.clone();
        for (b, bz) in bases.iter().zip(&bzs).skip(1) {
            let a = lm(bz, y, b.adjoint() * &u, cfg.later_level_iters);
            u = b * a;
        }
        let r = rel(&u);
        if fin.as_ref().is_none_or(|f| r < f.0) {
            fin = Some((r, u));
        }
        if r < cfg.accept_residual {
            break;
        }
    }
    let (residual, u) = fin.expect("at least one batch");
    Refinement { u, residual, batches }
}

/// Rotates so the largest-modulus value is real positive.
fn normalize_phase(values: &mut [C64]) {
    if let Some(m) = values.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())) {
        if m.norm() > 0.0 {
            let u = m.conj() / m.norm();
            for v in values.iter_mut() {
                *v *= u;
            }
        }
    }
}

struct Pipeline {
    values: Vec<C64>,
    conds: Vec<f64>,
    anchor: Option<f64>,
    warnings: Vec<String>,
}

/// Frequency nodes as `k_min + i` multiples of a spacing, when equally spaced through the origin.
fn frequency_lattice(w: &[f64]) -> Option<(f64, i64)> {
    if w.len() < 2 {
        return None;
    }
    let d = w[1] - w[0];
    if !(d > 0.0) {
        return None;
    }
    let k0 = (w[0] / d).round();
    if (w[0] - k0 * d).abs() > 1e-9 * d {
        return None;
    }
    for (i, v) in w.iter().enumerate() {
        if (v - (k0 + i as f64) * d).abs() > 1e-9 * d {
            return None;
        }
    }
    Some((d, k0 as i64))
}

fn run_pipeline(
    samples: &SpectrogramSamples,
    class: &CompactClassSpec,
    grid: &Grid,
    cfg: &CompactReconConfig,
) -> Result<Pipeline> {
    let set = &samples.set;
    let (d, k_min) = frequency_lattice(&set.w_values).ok_or(Error::NotProductSet)?;
    let band = 1.0 / (2.0 * d);
    let mut warnings = Vec::new();
    if band + 1e-12 < class.c {
        warnings.push(format!(
            "frequency spacing {d} is coarser than the Nyquist spacing {}",
            1.0 / (2.0 * class.c)
        ));
    }
    let m = set.w_values.len();
    let slices: Vec<(f64, ShannonSlice)> = set
        .x_values
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            let s = ShannonSlice::new(band, k_min, samples.values[n * m..(n + 1) * m].to_vec()).expect("positive band");
            (x, s)
        })
        .collect();
    let edge = slices.iter().map(|(_, s)| s.edge_ratio()).fold(0.0, f64::max);
    if edge > 1e-6 {
        warnings.push(format!("frequency slices not decayed at the truncation edge (ratio {edge:.2e})"));
    }

    let count = grid.count as i64;
    let (lo, hi) = class.support();
    let lags: Vec<i64> = (-(count - 1)..count).collect();
    let solved: Vec<(Vec<C64>, f64)> = lags
        .par_iter()
        .map(|&l| {
            let xi = l as f64 * grid.step;
            let corr: Vec<(f64, C64)> = slices.iter().map(|(x, s)| (*x, freq_correlation(s, xi))).collect();
            let support = (lo.max(lo + xi), hi.min(hi + xi));
            invert_gaussian_translates(&corr, xi, *grid, support, cfg.reg)
                .map(|sol| (sol.signal.into_values(), sol.cond))
        })
        .collect::<Result<Vec<_>>>()?;
    let lag = |l: i64| &solved[(l + count - 1) as usize].0;
    let conds: Vec<f64> = solved.iter().map(|s| s.1).collect();

    let f0: Vec<f64> = lag(0).iter().map(|v| v.re.max(0.0)).collect();
    let (p, fp2) = f0
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    if fp2 <= 0.0 {
        return Ok(Pipeline {
            values: vec![C64::new(0.0, 0.0); grid.count],
            conds,
            anchor: None,
            warnings,
        });
    }
    let energy: f64 = samples.values.iter().sum::<f64>() * d * spacing_of(&set.x_values);
    if fp2 < cfg.anchor_threshold * energy / class.c {
        return Err(Error::NoPhaseAnchor);
    }
    let fp = fp2.sqrt();
    let n = grid.count;
    // f_{t - q}(t) = f(q) conj(f(t)).
    let corr_at = |t: usize, q: usize| lag(t as i64 - q as i64)[t];
    let mut f = vec![C64::new(0.0, 0.0); n];
    match cfg.phase_mode {
        PhaseMode::Anchor => {
            for (t, v) in f.iter_mut().enumerate() {
                *v = corr_at(t, p).conj() / fp;
            }
            f[p] = C64::new(fp, 0.0);
        }
        PhaseMode::SpanningTree => {
            let thr = 1e-4 * fp2 * fp2;
            let mut reached = vec![false; n];
            reached[p] = true;
            f[p] = C64::new(fp, 0.0);
            loop {
                let mut pick: Option<(usize, usize, usize, f64)> = None;
                for q in (0..n).filter(|&q| reached[q]) {
                    for t in (0..n).filter(|&t| !reached[t]) {
                        let w = f0[q] * f0[t];
                        if w < thr {
                            continue;
                        }
                        let dist = q.abs_diff(t);
                        let better = match pick {
                            None => true,
                            Some((_, _, d0, w0)) => dist < d0 || (dist == d0 && w > w0),
                        };
                        if better {
                            pick = Some((q, t, dist, w));
                        }
                    }
                }
                let Some((q, t, _, _)) = pick else { break };
                reached[t] = true;
                let fq = f[q];
                f[t] = if fq.norm() > 0.0 { corr_at(t, q).conj() / fq.conj() } else { C64::new(0.0, 0.0) };
            }
        }
    }
    if cfg.average {
        let anchors: Vec<usize> = (0..n).filter(|&q| f0[q] >= 0.5 * fp2).collect();
        let den: f64 = anchors.iter().map(|&q| f[q].norm_sqr()).sum();
        if den > 0.0 {
            f = (0..n)
                .map(|t| anchors.iter().map(|&q| corr_at(t, q).conj() * f[q]).sum::<C64>() / den)
                .collect();
        }
    }
    Ok(Pipeline {
        values: f,
        conds,
        anchor: Some(grid.point(p)),
        warnings,
    })
}

fn spacing_of(x: &[f64]) -> f64 {
    if x.len() < 2 {
        1.0
    } else {
        ((x[x.len() - 1] - x[0]) / (x.len() - 1) as f64).abs()
    }
}

/// Recovers a signal supported in `[-c/2, c/2]` (or, for a rotated set, one whose fractional Fourier
/// transform by the set's angle is) up to a global phase.
pub fn reconstruct_compact(
    samples: &SpectrogramSamples,
    class: &CompactClassSpec,
    cfg: &CompactReconConfig,
) -> Result<(ComplexSignal, ReconDiagnostics)> {
    let grid = class.grid(cfg.step)?;
    let theta = samples.set.theta;
    let out_grid = if theta == 0.0 {
        grid
    } else {
        Grid::covering(-cfg.rotation_radius, cfg.rotation_radius, grid.step)?
    };
    let mut diag = ReconDiagnostics::default();
    if samples.values.iter().all(|v| *v == 0.0) {
        return Ok((ComplexSignal::zeros(out_grid), diag));
    }
    let g = forward_matrix(samples, &grid);
    let y = &samples.values;
    let ysq: f64 = y.iter().map(|v| v * v).sum();

    let pipe = match run_pipeline(samples, class, &grid, cfg) {
        Ok(p) => Some(p),
        Err(Error::NotProductSet) => {
            diag.warnings.push("frequency nodes are not a lattice through the origin; pipeline skipped".into());
            None
        }
        Err(Error::NoPhaseAnchor) if cfg.refine => {
            diag.warnings.push("no valid phase anchor; refinement started from random points only".into());
            None
        }
        Err(e) => return Err(e),
    };
    let mut values = match pipe {
        Some(p) => {
            let u = DVector::from_vec(p.values);
            diag.pipeline_residual = Some((misfit(y, &intensities(&g, &u)) / ysq).sqrt());
            diag.condition_estimates = p.conds;
            diag.phase_anchor = p.anchor;
            diag.warnings.extend(p.warnings);
            u
        }
        None => DVector::zeros(grid.count),
    };
    if cfg.refine {
        let start = if values.iter().any(|v| v.norm() > 0.0) { Some(&values) } else { None };
        let r = refine(&g, y, start, cfg);
        diag.refine_batches = r.batches;
        if !(r.residual < cfg.accept_residual) {
            diag.warnings.push(format!(
                "refinement stopped at residual {:.2e} above {:.0e}; the samples may not determine the signal",
                r.residual, cfg.accept_residual
            ));
        }
        if diag.pipeline_residual.is_none_or(|p| r.residual <= p) {
            values = r.u;
        }
    }
    diag.residual = (misfit(y, &intensities(&g, &values)) / ysq).sqrt();
    let mut v: Vec<C64> = values.iter().copied().collect();
    normalize_phase(&mut v);
    let g_sig = ComplexSignal::new(grid, v)?;
    if theta == 0.0 {
        return Ok((g_sig, diag));
    }
    let padded = ComplexSignal::from_fn(out_grid, |t| match grid.index_of(t, 1e-9 * grid.step) {
        Some(i) => g_sig.values()[i],
        None => C64::new(0.0, 0.0),
    });
    let f = frft(&padded, RotationAngle(-theta), FrftMethod::Hermite)?;
    Ok((f, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_sampling_set, SequenceDescriptor};
    use crate::reconstruction::sample_signal;
    use crate::signal::{random_compact, relative_phase_distance, Profile};

    fn lattice_samples(f: &ComplexSignal, nx: usize, nw: usize, dw: f64) -> SpectrogramSamples {
        let x = SequenceDescriptor::affine(1.0, 0.0).unwrap().truncated(nx);
        let w = SequenceDescriptor::affine(dw, 0.0).unwrap().truncated(nw);
        sample_signal(f, &build_sampling_set(&x, &w, 0.0, nx).unwrap())
    }

    #[test]
    fn zero_signal_gives_zero() {
        let class = CompactClassSpec::new(2.0).unwrap();
        let f = ComplexSignal::zeros(class.default_grid());
        let (r, d) = reconstruct_compact(&lattice_samples(&f, 4, 4, 0.25), &class, &CompactReconConfig::default()).unwrap();
        assert!(r.values().iter().all(|v| *v == C64::new(0.0, 0.0)));
        assert_eq!(d.residual, 0.0);
    }

    #[test]
    fn pipeline_recovers_squared_modulus_scale() {
        let class = CompactClassSpec::new(1.0).unwrap();
        let f = random_compact(&class, 1, Profile::Nonvanishing, class.default_grid());
        let cfg = CompactReconConfig {
            refine: false,
            ..Default::default()
        };
        let (r, d) = reconstruct_compact(&lattice_samples(&f, 16, 16, 0.25), &class, &cfg).unwrap();
        assert!(d.phase_anchor.is_some());
        assert_eq!(d.condition_estimates.len(), 2 * f.len() - 1);
        assert!(r.norm() > 0.2 * f.norm() && r.norm() < 5.0 * f.norm());
    }

    #[test]
    fn refined_round_trip() {
        let class = CompactClassSpec::new(2.0).unwrap();
        let f = random_compact(&class, 3, Profile::Nonvanishing, class.default_grid());
        let s = lattice_samples(&f, 16, 12, 0.25);
        let cfg = CompactReconConfig {
            seed: 3,
            ..Default::default()
        };
        let (r, d) = reconstruct_compact(&s, &class, &cfg).unwrap();
        let dist = relative_phase_distance(&f, &r).unwrap();
        assert!(dist < 5e-2, "{dist} {d:?}");
        assert!(d.residual < 1e-4);
        let again = reconstruct_compact(&s, &class, &cfg).unwrap().0;
        assert_eq!(r, again);
    }
}
