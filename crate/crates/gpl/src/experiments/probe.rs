//! Empirical separation margins on a sampling set.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{sub_seeds, trial_seed, ExperimentConfig, RunOutcome, Status};
use crate::error::{Error, Result};
use crate::io::{fmt, write_csv, write_json, SCHEMA_VERSION};
use crate::lattice::{validate_uniqueness_config, SamplingSet, SignalClass};
use crate::reconstruction::{sample_signal, sample_sis};
use crate::signal::{random_compact, random_sis, relative_phase_distance, synthesize_sis, CompactClassSpec, Profile};

#[derive(Clone, Debug, Serialize)]
struct ProbeRow {
    trial: usize,
    distance: f64,
    margin: f64,
    phase_equal_margin: f64,
}

/// `max |a - b| / max a`.
fn discrepancy(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = a.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

fn probe_trial(class: &SignalClass, cfg: &ExperimentConfig, set: &SamplingSet, trial: usize) -> Result<ProbeRow> {
    let [sf, sh, sa] = sub_seeds::<3>(trial_seed(cfg.seed, trial));
    let alpha = ChaCha8Rng::seed_from_u64(sa).random_range(0.0..2.0 * PI);
    let tau = C64::from_polar(1.0, alpha);
    let profile = cfg.truth.profile.profile().unwrap_or(Profile::Smooth);
    let (distance, yf, yh, ytau) = match class {
        SignalClass::Compact { c } => {
            let class = CompactClassSpec::new(*c)?;
            let grid = class.grid(cfg.compact.step)?;
            let f = random_compact(&class, sf, profile, grid);
            let h = random_compact(&class, sh, profile, grid);
            (
                relative_phase_distance(&f, &h)?,
                sample_signal(&f, set).values,
                sample_signal(&h, set).values,
                sample_signal(&f.scale(tau), set).values,
            )
        }
        SignalClass::ShiftInvariant { beta } => {
            let f = random_sis(beta.value, cfg.truth.k_min, cfg.truth.len, sf, profile)?;
            let h = random_sis(beta.value, cfg.truth.k_min, cfg.truth.len, sh, profile)?;
            let grid = f.default_grid();
            let d = relative_phase_distance(&synthesize_sis(&f, grid)?, &synthesize_sis(&h, grid)?)?;
            (
                d,
                sample_sis(&f, set)?.values,
                sample_sis(&h, set)?.values,
                sample_sis(&f.scaled(tau), set)?.values,
            )
        }
    };
    Ok(ProbeRow {
        trial,
        distance,
        margin: discrepancy(&yf, &yh),
        phase_equal_margin: discrepancy(&yf, &ytau),
    })
}

/// Histogram of `log10(margin)` in unit bins over `[-17, 1)`; zero margins go to the first bin.
fn histogram(margins: &[f64]) -> Vec<(i32, i32, usize)> {
    let mut bins: Vec<(i32, i32, usize)> = (-17..1).map(|lo| (lo, lo + 1, 0)).collect();
    for &m in margins {
        let l = if m > 0.0 { m.log10().floor() as i32 } else { -17 };
        let i = (l.clamp(-17, 0) + 17) as usize;
        bins[i].2 += 1;
    }
    bins
}

/// Draws pairs of class members and records how well the samples separate them.
pub fn run_uniqueness_probe(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let class = cfg.class.as_ref().ok_or_else(|| Error::InvalidParameter("probe needs a class".into()))?;
    let set = cfg
        .sampling
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("probe needs a sampling set".into()))?
        .build()?;
    let report = validate_uniqueness_config(class, &set);
    let rows = (0..cfg.trials)
        .into_par_iter()
        .map(|t| probe_trial(class, cfg, &set, t))
        .collect::<Result<Vec<_>>>()?;
    let delta = cfg.tolerances.probe_delta.unwrap_or(1e-3);
    let eq_tol = cfg.tolerances.phase_equal_margin.unwrap_or(1e-12);
    let distinct: Vec<&ProbeRow> = rows.iter().filter(|r| r.distance > delta).collect();
    let min_margin = distinct.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let max_eq = rows.iter().map(|r| r.phase_equal_margin).fold(0.0, f64::max);
    let separated = distinct.iter().all(|r| r.margin > 0.0);
    let phase_blind = max_eq < eq_tol;

    write_csv(
        &out.join("pairs.csv"),
        &["trial", "distance", "margin", "phase_equal_margin"],
        rows.iter()
            .map(|r| vec![r.trial.to_string(), fmt(r.distance), fmt(r.margin), fmt(r.phase_equal_margin)]),
    )?;
    let margins: Vec<f64> = distinct.iter().map(|r| r.margin).collect();
    write_csv(
        &out.join("margin_histogram.csv"),
        &["log10_lo", "log10_hi", "count"],
        histogram(&margins)
            .into_iter()
            .map(|(lo, hi, c)| vec![lo.to_string(), hi.to_string(), c.to_string()]),
    )?;
    let hypotheses_met = report.passed();
    let status = if !separated || !phase_blind {
        Status::AcceptanceFailure
    } else if report.failed() {
        Status::ValidationFailure
    } else {
        Status::Success
    };
    let summary = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": "uniqueness_probe",
        "seed": cfg.seed,
        "trials": cfg.trials,
        "hypotheses_met": hypotheses_met,
        "flag": if hypotheses_met { serde_json::Value::Null } else { "hypotheses not met".into() },
        "validation": report,
        "distinct_pairs": distinct.len(),
        "min_margin": if distinct.is_empty() { serde_json::Value::Null } else { min_margin.into() },
        "max_phase_equal_margin": max_eq,
        "separated": separated,
        "phase_blind": phase_blind,
        "status": status,
    });
    write_json(&out.join("summary.json"), &summary)?;
    Ok(RunOutcome {
        status,
        files: vec!["pairs.csv".into(), "margin_histogram.csv".into(), "summary.json".into()],
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_bins() {
        let h = histogram(&[0.0, 1e-3, 0.5, 2.0]);
        assert_eq!(h.len(), 18);
        assert_eq!(h[0].2, 1);
        assert_eq!(h.iter().find(|b| b.0 == -3).unwrap().2, 1);
        assert_eq!(h.iter().find(|b| b.0 == -1).unwrap().2, 1);
        assert_eq!(h.last().unwrap().2, 1);
    }

    #[test]
    fn discrepancy_is_relative() {
        assert_eq!(discrepancy(&[2.0, 4.0], &[2.0, 3.0]), 0.25);
        assert_eq!(discrepancy(&[0.0], &[0.0]), 0.0);
    }
}
