//! Batch experiments writing CSV and JSON outputs.

mod density;
mod forward;
mod probe;
mod recon;

pub use density::run_density_report;
pub use forward::{run_forward_check, CheckKind, CheckResult, ForwardConfig};
pub use probe::run_uniqueness_probe;
pub use recon::{run_reconstruction, TrialRecord};

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::SCHEMA_VERSION;
use crate::lattice::{build_sampling_set, BetaTag, SamplingSet, SequenceDescriptor, SignalClass};
use crate::reconstruction::{CompactReconConfig, SisReconConfig};
use crate::signal::{CompactClassSpec, Profile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ForwardCheck,
    UniquenessProbe,
    Reconstruct,
    DensityReport,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ForwardCheck => "forward_check",
            Self::UniquenessProbe => "uniqueness_probe",
            Self::Reconstruct => "reconstruct",
            Self::DensityReport => "density_report",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub x_seq: SequenceDescriptor,
    pub w_seq: SequenceDescriptor,
    #[serde(default)]
    pub theta: f64,
    pub truncation: usize,
}

impl SamplingConfig {
    pub fn build(&self) -> Result<SamplingSet> {
        build_sampling_set(&self.x_seq, &self.w_seq, self.theta, self.truncation)
    }
}

/// Ground-truth family; `zero` gives the zero signal.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthProfile {
    Smooth,
    Rough,
    #[default]
    Nonvanishing,
    Zero,
}

impl TruthProfile {
    pub fn profile(&self) -> Option<Profile> {
        match self {
            Self::Smooth => Some(Profile::Smooth),
            Self::Rough => Some(Profile::Rough),
            Self::Nonvanishing => Some(Profile::Nonvanishing),
            Self::Zero => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruthConfig {
    pub profile: TruthProfile,
    /// First coefficient index of shift-invariant truths.
    pub k_min: i64,
    /// Number of coefficients of shift-invariant truths.
    pub len: usize,
}

impl Default for TruthConfig {
    fn default() -> Self {
        Self {
            profile: TruthProfile::Nonvanishing,
            k_min: -3,
            len: 7,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Acceptance bound on the median relative phase distance.
    pub median_phase_dist: Option<f64>,
    pub max_phase_dist: Option<f64>,
    pub rank1_gap: Option<f64>,
    /// Minimum relative phase distance of distinct probe pairs.
    pub probe_delta: Option<f64>,
    /// Bound on the sample discrepancy of phase-equal probe pairs.
    pub phase_equal_margin: Option<f64>,
}

/// Samples read from disk instead of synthesized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// Metadata JSON of a samples CSV, relative to the config file.
    pub samples: PathBuf,
}

/// Versioned experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    #[serde(default)]
    pub class: Option<SignalClass>,
    #[serde(default)]
    pub sampling: Option<SamplingConfig>,
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub truth: TruthConfig,
    #[serde(default)]
    pub compact: CompactReconConfig,
    #[serde(default)]
    pub sis: SisReconConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub forward: ForwardConfig,
    #[serde(default)]
    pub input: Option<InputConfig>,
    /// Directory against which relative input paths resolve; set by the loader.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn one() -> usize {
    1
}

const KNOWN_IRRATIONALS: &[(&str, f64)] = &[
    ("sqrt2", std::f64::consts::SQRT_2),
    ("sqrt3", 1.732_050_807_568_877_2),
    ("sqrt5", 2.236_067_977_499_79),
    ("pi", std::f64::consts::PI),
    ("e", std::f64::consts::E),
    ("golden", 1.618_033_988_749_895),
];

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Schema and parameter checks for `kind`; returns non-fatal warnings.
    pub fn validate(&self, kind: ExperimentKind) -> Result<Vec<String>> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        let mut warnings = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} unsupported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if let Some(k) = self.experiment {
            if k != kind {
                return bad(format!("config is for {}, not {}", k.name(), kind.name()));
            }
        }
        match &self.class {
            Some(SignalClass::Compact { c }) => {
                CompactClassSpec::new(*c)?;
            }
            Some(SignalClass::ShiftInvariant { beta }) => {
                if !(beta.value > 0.0) || !beta.value.is_finite() {
                    return bad(format!("beta must be positive, got {}", beta.value));
                }
                match &beta.tag {
                    BetaTag::Rational { p, q } => {
                        if *q == 0 || *p <= 0 || *q < 0 {
                            return bad(format!("rational beta needs p, q > 0, got {p}/{q}"));
                        }
                        let r = *p as f64 / *q as f64;
                        if (r - beta.value).abs() > 1e-12 * r {
                            warnings.push(format!("beta value {} differs from declared rational {p}/{q}", beta.value));
                        }
                    }
                    BetaTag::Irrational { symbol } => {
                        if let Some((_, v)) = KNOWN_IRRATIONALS.iter().find(|(s, _)| s == symbol) {
                            if (v - beta.value).abs() > 1e-12 * v {
                                warnings.push(format!("beta value {} differs from {symbol} = {v}", beta.value));
                            }
                        }
                    }
                    BetaTag::Unspecified => {}
                }
            }
            None => {
                if kind != ExperimentKind::ForwardCheck {
                    return bad(format!("{} needs a class", kind.name()));
                }
            }
        }
        match &self.sampling {
            Some(s) => {
                if s.truncation < 1 {
                    return bad("sampling truncation must be at least 1".into());
                }
                if !s.theta.is_finite() {
                    return bad("sampling theta must be finite".into());
                }
                s.build()?;
            }
            None => {
                if matches!(kind, ExperimentKind::UniquenessProbe | ExperimentKind::DensityReport)
                    || (kind == ExperimentKind::Reconstruct && self.input.is_none())
                {
                    return bad(format!("{} needs a sampling set", kind.name()));
                }
            }
        }
        if !(self.compact.step > 0.0) {
            return bad("compact.step must be positive".into());
        }
        if !(self.forward.grid_step > 0.0) {
            return bad("forward.grid_step must be positive".into());
        }
        if self.truth.len == 0 {
            return bad("truth.len must be positive".into());
        }
        for (name, v) in [
            ("median_phase_dist", self.tolerances.median_phase_dist),
            ("max_phase_dist", self.tolerances.max_phase_dist),
            ("rank1_gap", self.tolerances.rank1_gap),
            ("probe_delta", self.tolerances.probe_delta),
            ("phase_equal_margin", self.tolerances.phase_equal_margin),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0) {
                    return bad(format!("tolerance {name} must be nonnegative"));
                }
            }
        }
        Ok(warnings)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }
}

/// Per-trial seed.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ trial as u64
}

/// Independent sub-seeds for one trial.
pub(crate) fn sub_seeds<const N: usize>(seed: u64) -> [u64; N] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::array::from_fn(|_| rng.random())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    ValidationFailure,
    AcceptanceFailure,
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Success => "success",
            Self::ValidationFailure => "validation_failure",
            Self::AcceptanceFailure => "acceptance_failure",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Success => 0,
            Self::ValidationFailure => 2,
            Self::AcceptanceFailure => 3,
        }
    }
}

/// Result of a run: status, files written (relative to the output directory), JSON summary.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: Status,
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

/// Validates the config, creates `out`, and dispatches.
pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let warnings = cfg.validate(kind)?;
    std::fs::create_dir_all(out)?;
    let mut outcome = match kind {
        ExperimentKind::ForwardCheck => run_forward_check(cfg, out)?,
        ExperimentKind::UniquenessProbe => run_uniqueness_probe(cfg, out)?,
        ExperimentKind::Reconstruct => run_reconstruction(cfg, out)?,
        ExperimentKind::DensityReport => run_density_report(cfg, out)?,
    };
    if !warnings.is_empty() {
        outcome.summary["config_warnings"] = serde_json::json!(warnings);
    }
    Ok(outcome)
}

pub(crate) fn median(v: &[f64]) -> Option<f64> {
    let mut s: Vec<f64> = v.iter().copied().filter(|x| !x.is_nan()).collect();
    if s.is_empty() {
        return None;
    }
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Some(if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) })
}
