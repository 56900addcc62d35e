//! Oracle-agreement suites for the forward model.

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sub_seeds, trial_seed, ExperimentConfig, RunOutcome, Status};
use crate::error::Result;
use crate::io::{fmt, write_csv, write_json, SCHEMA_VERSION};
use crate::signal::{phi, random_compact, random_sis, synthesize_sis, CompactClassSpec, ComplexSignal, Grid, Profile, SisSpec};
use crate::spectrogram::{freq_band_check, periodized_ratio, spectrogram_sis_closed};
use crate::transforms::frft::{frft, rotate, FrftMethod, RotationAngle};
use crate::transforms::gabor::{ambiguity, gabor_at, gabor_gaussian_closed};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    GaborClosedForm,
    SisSpectrogram,
    FrftFixedPoint,
    FrftGroupLaw,
    AmbiguityRotation,
    BandLimit,
    Periodicity,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        Self::GaborClosedForm,
        Self::SisSpectrogram,
        Self::FrftFixedPoint,
        Self::FrftGroupLaw,
        Self::AmbiguityRotation,
        Self::BandLimit,
        Self::Periodicity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::GaborClosedForm => "gabor_closed_form",
            Self::SisSpectrogram => "sis_spectrogram",
            Self::FrftFixedPoint => "frft_fixed_point",
            Self::FrftGroupLaw => "frft_group_law",
            Self::AmbiguityRotation => "ambiguity_rotation",
            Self::BandLimit => "band_limit",
            Self::Periodicity => "periodicity",
        }
    }

    pub fn tolerance(&self) -> f64 {
        match self {
            Self::GaborClosedForm => 1e-10,
            Self::SisSpectrogram => 1e-8,
            Self::FrftFixedPoint => 1e-8,
            Self::FrftGroupLaw | Self::AmbiguityRotation => 1e-7,
            Self::BandLimit | Self::Periodicity => 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForwardConfig {
    /// `None` runs every check.
    pub checks: Option<Vec<CheckKind>>,
    /// Quadrature step of all sampled signals.
    pub grid_step: f64,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        Self {
            checks: None,
            grid_step: 1.0 / 64.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: CheckKind,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Sum of three modulated, translated Gaussians with offsets in `[-1, 1]`.
pub(crate) fn random_smooth(seed: u64, grid: Grid) -> ComplexSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(C64, f64, f64)> = (0..3)
        .map(|_| {
            let z = C64::from_polar(rng.random_range(0.3..1.0), rng.random_range(-PI..PI));
            (z, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .collect();
    ComplexSignal::from_fn(grid, |t| {
        terms
            .iter()
            .map(|(z, a, nu)| z * phi(t - a) * C64::from_polar(1.0, 2.0 * PI * nu * t))
            .sum()
    })
}

/// Random spec with at most nine coefficients, `beta` in `{1, sqrt 2, 1.7}`, centred near the origin.
pub(crate) fn random_small_spec(seed: u64) -> SisSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let beta = [1.0, SQRT_2, 1.7][rng.random_range(0..3)];
    let len = rng.random_range(1..=9usize);
    let k_min = -((len as i64 - 1) / 2);
    random_sis(beta, k_min, len, rng.random(), Profile::Smooth).expect("positive beta")
}

/// Normwise relative error of the quadrature spectrogram against the closed form on a 17x17 grid of `[-4, 4]^2`.
pub fn sis_quadrature_error(spec: &SisSpec, step: f64) -> Result<f64> {
    let (lo, hi) = spec.center_range().unwrap_or((0.0, 0.0));
    let grid = Grid::covering(lo - 8.0, hi + 8.0, step)?;
    let f = synthesize_sis(spec, grid)?;
    let (mut num, mut den): (f64, f64) = (0.0, 0.0);
    for i in 0..17 {
        for j in 0..17 {
            let (x, w) = (-4.0 + 0.5 * i as f64, -4.0 + 0.5 * j as f64);
            let e = spectrogram_sis_closed(spec, x, w)?;
            num = num.max((gabor_at(&f, x, w).norm_sqr() - e).abs());
            den = den.max(e.abs());
        }
    }
    Ok(if den > 0.0 { num / den } else { num })
}

fn run_check(kind: CheckKind, seed: u64, step: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wide = Grid::symmetric(8.0, step)?;
    Ok(match kind {
        CheckKind::GaborClosedForm => {
            let f = ComplexSignal::from_real_fn(wide, phi);
            (0..100)
                .map(|_| {
                    let (x, w) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
                    (gabor_at(&f, x, w) - gabor_gaussian_closed(x, w)).norm()
                })
                .fold(0.0, f64::max)
        }
        CheckKind::SisSpectrogram => {
            let mut m: f64 = 0.0;
            for s in sub_seeds::<10>(seed) {
                m = m.max(sis_quadrature_error(&random_small_spec(s), step)?);
            }
            m
        }
        CheckKind::FrftFixedPoint => {
            let f = ComplexSignal::from_real_fn(wide, phi);
            let mut m: f64 = 0.0;
            for th in [0.3, 1.0, 2.5] {
                m = m.max(frft(&f, RotationAngle(th), FrftMethod::Hermite)?.sup_dist(&f)?);
            }
            m
        }
        CheckKind::FrftGroupLaw => {
            let mut m: f64 = 0.0;
            for s in sub_seeds::<5>(seed) {
                let f = random_smooth(s, wide);
                let (th, eta) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
                let a = frft(&frft(&f, RotationAngle(eta), FrftMethod::Hermite)?, RotationAngle(th), FrftMethod::Hermite)?;
                let b = frft(&f, RotationAngle(th + eta), FrftMethod::Hermite)?;
                m = m.max(a.sub(&b)?.norm() / f.norm());
            }
            m
        }
        CheckKind::AmbiguityRotation => {
            let mut m: f64 = 0.0;
            for s in sub_seeds::<5>(seed) {
                let [sf, sg] = sub_seeds::<2>(s);
                let (f, g) = (random_smooth(sf, wide), random_smooth(sg, wide));
                let th = rng.random_range(-PI..PI);
                let (ff, fg) = (
                    frft(&f, RotationAngle(th), FrftMethod::Hermite)?,
                    frft(&g, RotationAngle(th), FrftMethod::Hermite)?,
                );
                for _ in 0..4 {
                    let z = (rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
                    let r = rotate(th, z);
                    let lhs = ambiguity(&f, &g, r.0, r.1)?;
                    let rhs = ambiguity(&ff, &fg, z.0, z.1)?;
                    m = m.max((lhs - rhs).norm());
                }
            }
            m
        }
        CheckKind::BandLimit => {
            let class = CompactClassSpec::new(2.0)?;
            let grid = class.grid(step)?;
            let mut m: f64 = 0.0;
            for s in sub_seeds::<10>(seed) {
                let f = random_compact(&class, s, Profile::Rough, grid);
                for x in [0.0, 1.0, -2.0] {
                    m = m.max(freq_band_check(&f, &class, x).out_of_band);
                }
            }
            m
        }
        CheckKind::Periodicity => {
            let spec = random_sis(SQRT_2, -3, 7, rng.random(), Profile::Smooth)?;
            let p = 2.0 / spec.beta;
            (0..100)
                .map(|_| {
                    let (x, w) = (rng.random_range(-3.0..3.0), rng.random_range(-5.0..5.0));
                    (periodized_ratio(&spec, x, w) - periodized_ratio(&spec, x, w + p)).abs()
                })
                .fold(0.0, f64::max)
        }
    })
}

/// Runs the configured checks; results in `checks.csv` and `summary.json`.
pub fn run_forward_check(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let kinds = cfg.forward.checks.clone().unwrap_or_else(|| CheckKind::ALL.to_vec());
    let results = kinds
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let e = run_check(k, trial_seed(cfg.seed, i), cfg.forward.grid_step)?;
            let tolerance = k.tolerance();
            Ok(CheckResult {
                check: k,
                max_error: e,
                tolerance,
                pass: e < tolerance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv(
        &out.join("checks.csv"),
        &["check", "max_error", "tolerance", "pass"],
        results
            .iter()
            .map(|r| vec![r.check.name().into(), fmt(r.max_error), fmt(r.tolerance), r.pass.to_string()]),
    )?;
    let all = results.iter().all(|r| r.pass);
    let status = if all { Status::Success } else { Status::AcceptanceFailure };
    let summary = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": "forward_check",
        "seed": cfg.seed,
        "grid_step": cfg.forward.grid_step,
        "checks": results,
        "all_pass": all,
        "status": status,
    });
    write_json(&out.join("summary.json"), &summary)?;
    Ok(RunOutcome {
        status,
        files: vec!["checks.csv".into(), "summary.json".into()],
        summary,
    })
}
