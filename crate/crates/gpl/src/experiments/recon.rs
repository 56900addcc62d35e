//! Reconstruction studies: synthesize, sample, reconstruct, compare.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{median, sub_seeds, trial_seed, ExperimentConfig, RunOutcome, Status};
use crate::error::{Error, Result};
use crate::io::{fmt, read_samples, write_csv, write_json, write_signal, SCHEMA_VERSION};
use crate::lattice::{validate_uniqueness_config, SamplingSet, SignalClass};
use crate::reconstruction::{
    reconstruct_compact, reconstruct_sis, sample_signal, sample_sis, CompactReconConfig, ReconDiagnostics,
    SpectrogramSamples,
};
use crate::signal::{
    random_compact, random_sis, relative_phase_distance, synthesize_sis, CompactClassSpec, ComplexSignal, Grid, SisSpec,
};
use crate::transforms::frft::{frft, FrftMethod, RotationAngle};
use num_complex::Complex64 as C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    #[serde(with = "crate::io::nan_as_null")]
    pub phase_dist: f64,
    #[serde(with = "crate::io::nan_as_null")]
    pub residual: f64,
    #[serde(with = "crate::io::nan_as_null")]
    pub cond: f64,
    pub rank1_gap: Option<f64>,
    pub error: Option<String>,
    pub diagnostics: Option<ReconDiagnostics>,
    #[serde(skip)]
    pub signal: Option<ComplexSignal>,
}

impl TrialRecord {
    fn failed(trial: usize, e: Error) -> Self {
        Self {
            trial,
            phase_dist: f64::NAN,
            residual: f64::NAN,
            cond: f64::NAN,
            rank1_gap: None,
            error: Some(e.to_string()),
            diagnostics: None,
            signal: None,
        }
    }
}

fn max_cond(d: &ReconDiagnostics) -> f64 {
    d.condition_estimates.iter().copied().fold(f64::NAN, f64::max)
}

/// Compact truth; for a rotated set, the truth is `F_{-theta} g` with `g` in the class.
fn compact_truth(class: &CompactClassSpec, cfg: &ExperimentConfig, seed: u64, theta: f64) -> Result<ComplexSignal> {
    let grid = class.grid(cfg.compact.step)?;
    let g = match cfg.truth.profile.profile() {
        Some(p) => random_compact(class, seed, p, grid),
        None => ComplexSignal::zeros(grid),
    };
    if theta == 0.0 {
        return Ok(g);
    }
    let r = cfg.compact.rotation_radius;
    let wide = Grid::covering(-r, r, grid.step)?;
    let padded = ComplexSignal::from_fn(wide, |t| match grid.index_of(t, 1e-9) {
        Some(i) => g.values()[i],
        None => C64::new(0.0, 0.0),
    });
    frft(&padded, RotationAngle(-theta), FrftMethod::Hermite)
}

fn sis_truth(beta: f64, cfg: &ExperimentConfig, seed: u64) -> Result<SisSpec> {
    match cfg.truth.profile.profile() {
        Some(p) => random_sis(beta, cfg.truth.k_min, cfg.truth.len, seed, p),
        None => SisSpec::new(beta, cfg.truth.k_min, vec![C64::new(0.0, 0.0); cfg.truth.len]),
    }
}

fn sis_distance(truth: &SisSpec, rec: &SisSpec) -> Result<(f64, ComplexSignal)> {
    let grid = if truth.center_range().is_some() { truth.default_grid() } else { rec.default_grid() };
    let r = synthesize_sis(rec, grid)?;
    Ok((relative_phase_distance(&synthesize_sis(truth, grid)?, &r)?, r))
}

fn compact_cfg(cfg: &ExperimentConfig, seed: u64) -> CompactReconConfig {
    CompactReconConfig {
        seed,
        ..cfg.compact.clone()
    }
}

fn run_trial(class: &SignalClass, cfg: &ExperimentConfig, set: &SamplingSet, trial: usize) -> Result<TrialRecord> {
    let [s_truth, s_recon] = sub_seeds::<2>(trial_seed(cfg.seed, trial));
    match class {
        SignalClass::Compact { c } => {
            let class = CompactClassSpec::new(*c)?;
            let f = compact_truth(&class, cfg, s_truth, set.theta)?;
            let samples = sample_signal(&f, set);
            let (u, d) = reconstruct_compact(&samples, &class, &compact_cfg(cfg, s_recon))?;
            Ok(TrialRecord {
                trial,
                phase_dist: relative_phase_distance(&f, &u)?,
                residual: d.residual,
                cond: max_cond(&d),
                rank1_gap: None,
                error: None,
                diagnostics: Some(d),
                signal: Some(u),
            })
        }
        SignalClass::ShiftInvariant { beta } => {
            let truth = sis_truth(beta.value, cfg, s_truth)?;
            let samples = sample_sis(&truth, set)?;
            let range = (cfg.truth.k_min, cfg.truth.k_min + cfg.truth.len as i64 - 1);
            let (rec, d) = reconstruct_sis(&samples, beta.value, range, &cfg.sis)?;
            let (dist, sig) = sis_distance(&truth, &rec)?;
            Ok(TrialRecord {
                trial,
                phase_dist: dist,
                residual: d.residual,
                cond: max_cond(&d),
                rank1_gap: d.rank1_gap,
                error: None,
                diagnostics: Some(d),
                signal: Some(sig),
            })
        }
    }
}

fn run_input(class: &SignalClass, cfg: &ExperimentConfig, samples: &SpectrogramSamples) -> TrialRecord {
    let result = match class {
        SignalClass::Compact { c } => CompactClassSpec::new(*c)
            .and_then(|cl| reconstruct_compact(samples, &cl, &compact_cfg(cfg, cfg.seed))),
        SignalClass::ShiftInvariant { beta } => {
            let range = (cfg.truth.k_min, cfg.truth.k_min + cfg.truth.len as i64 - 1);
            reconstruct_sis(samples, beta.value, range, &cfg.sis).and_then(|(rec, d)| {
                let grid = rec.default_grid();
                Ok((synthesize_sis(&rec, grid)?, d))
            })
        }
    };
    match result {
        Ok((u, d)) => TrialRecord {
            trial: 0,
            phase_dist: f64::NAN,
            residual: d.residual,
            cond: max_cond(&d),
            rank1_gap: d.rank1_gap,
            error: None,
            diagnostics: Some(d),
            signal: Some(u),
        },
        Err(e) => TrialRecord::failed(0, e),
    }
}

fn opt(v: f64) -> serde_json::Value {
    if v.is_finite() {
        v.into()
    } else {
        serde_json::Value::Null
    }
}

/// Writes `trials.csv`, per-trial `signals/` and `diagnostics/`, and `summary.json`.
pub fn run_reconstruction(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let class = cfg.class.as_ref().ok_or_else(|| Error::InvalidParameter("reconstruct needs a class".into()))?;
    let (set, records) = match &cfg.input {
        Some(input) => {
            let (samples, _) = read_samples(&cfg.resolve(&input.samples))?;
            let rec = run_input(class, cfg, &samples);
            (samples.set, vec![rec])
        }
        None => {
            let set = cfg
                .sampling
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("reconstruct needs a sampling set".into()))?
                .build()?;
            let records: Vec<TrialRecord> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(class, cfg, &set, t).unwrap_or_else(|e| TrialRecord::failed(t, e)))
                .collect();
            (set, records)
        }
    };
    let report = validate_uniqueness_config(class, &set);

    let mut files = vec!["trials.csv".into()];
    write_csv(
        &out.join("trials.csv"),
        &["trial", "phase_dist", "residual", "cond"],
        records
            .iter()
            .map(|r| vec![r.trial.to_string(), fmt(r.phase_dist), fmt(r.residual), fmt(r.cond)]),
    )?;
    std::fs::create_dir_all(out.join("signals"))?;
    std::fs::create_dir_all(out.join("diagnostics"))?;
    for r in &records {
        let stem = format!("trial_{:04}", r.trial);
        if let Some(s) = &r.signal {
            write_signal(&out.join("signals"), &stem, s)?;
            files.push(format!("signals/{stem}.csv").into());
            files.push(format!("signals/{stem}.json").into());
        }
        write_json(&out.join("diagnostics").join(format!("{stem}.json")), r)?;
        files.push(format!("diagnostics/{stem}.json").into());
    }

    let dists: Vec<f64> = records.iter().map(|r| r.phase_dist).collect();
    let med = median(&dists);
    let max = dists.iter().copied().filter(|d| !d.is_nan()).fold(f64::NAN, f64::max);
    let max_gap = records.iter().filter_map(|r| r.rank1_gap).fold(f64::NAN, f64::max);
    let errors = records.iter().filter(|r| r.error.is_some()).count();
    let tol = &cfg.tolerances;
    let mut failures = Vec::new();
    if let (Some(t), Some(m)) = (tol.median_phase_dist, med) {
        if !(m < t) {
            failures.push(format!("median phase distance {m} >= {t}"));
        }
    }
    if let Some(t) = tol.max_phase_dist {
        if !(max < t) {
            failures.push(format!("max phase distance {max} >= {t}"));
        }
    }
    if let Some(t) = tol.rank1_gap {
        if !(max_gap < t) {
            failures.push(format!("max rank-1 gap {max_gap} >= {t}"));
        }
    }
    let has_tol = tol.median_phase_dist.is_some() || tol.max_phase_dist.is_some() || tol.rank1_gap.is_some();
    if has_tol && errors > 0 {
        failures.push(format!("{errors} trials failed"));
    }
    let hypotheses_met = report.passed();
    let status = if !failures.is_empty() {
        Status::AcceptanceFailure
    } else if report.failed() {
        Status::ValidationFailure
    } else {
        Status::Success
    };
    let summary = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": "reconstruct",
        "seed": cfg.seed,
        "trials": records.len(),
        "hypotheses_met": hypotheses_met,
        "flag": if hypotheses_met { serde_json::Value::Null } else { "hypotheses not met".into() },
        "validation": report,
        "median_phase_dist": med.map(opt).unwrap_or(serde_json::Value::Null),
        "max_phase_dist": opt(max),
        "max_rank1_gap": opt(max_gap),
        "errors": errors,
        "acceptance_failures": failures,
        "status": status,
    });
    write_json(&out.join("summary.json"), &summary)?;
    files.push("summary.json".into());
    Ok(RunOutcome { status, files, summary })
}
