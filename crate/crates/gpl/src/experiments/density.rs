//! Hypothesis reports for a sampling set.

use std::fmt::Write as _;
use std::path::Path;

use super::{ExperimentConfig, RunOutcome, Status};
use crate::error::{Error, Result};
use crate::io::{write_json, SCHEMA_VERSION};
use crate::lattice::{
    lower_beurling_density, reciprocal_series_check, validate_uniqueness_config, weyl_density_check, SignalClass,
    ValidationReport,
};

fn table(report: &ValidationReport) -> String {
    let w = report.checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max(10);
    let mut s = format!("theorem: {:?}\n\n{:<w$}  {:<13}  detail\n", report.theorem, "hypothesis", "verdict");
    for c in &report.checks {
        let _ = writeln!(s, "{:<w$}  {:<13}  {}", c.name, format!("{:?}", c.verdict).to_lowercase(), c.detail);
    }
    let overall = if report.passed() {
        "pass"
    } else if report.failed() {
        "fail"
    } else {
        "indeterminate"
    };
    let _ = writeln!(s, "\noverall: {overall}");
    s
}

/// Evaluates every validator on the configured set; writes `report.json` and `report.txt`.
pub fn run_density_report(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let class = cfg.class.as_ref().ok_or_else(|| Error::InvalidParameter("density report needs a class".into()))?;
    let set = cfg
        .sampling
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("density report needs a sampling set".into()))?
        .build()?;
    let report = validate_uniqueness_config(class, &set);
    let weyl = match class {
        SignalClass::ShiftInvariant { beta } => Some(weyl_density_check(&set.w_seq, beta)),
        SignalClass::Compact { .. } => None,
    };
    let status = if report.failed() { Status::ValidationFailure } else { Status::Success };
    let summary = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": "density_report",
        "class": class,
        "theta": set.theta,
        "x_density": lower_beurling_density(&set.x_seq),
        "w_density": lower_beurling_density(&set.w_seq),
        "x_reciprocal_series": reciprocal_series_check(&set.x_seq, 0.0),
        "w_weyl": weyl,
        "report": report,
        "hypotheses_met": report.passed(),
        "status": status,
    });
    write_json(&out.join("report.json"), &summary)?;
    std::fs::write(out.join("report.txt"), table(&report))?;
    Ok(RunOutcome {
        status,
        files: vec!["report.json".into(), "report.txt".into()],
        summary,
    })
}
