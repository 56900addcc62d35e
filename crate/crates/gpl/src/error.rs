use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("shift not grid-aligned: tau = {tau}, step = {step}")]
    ShiftNotAligned { tau: f64, step: f64 },
    #[error("grid too narrow: need [{need_lo}, {need_hi}], have [{have_lo}, {have_hi}]")]
    GridTooNarrow {
        need_lo: f64,
        need_hi: f64,
        have_lo: f64,
        have_hi: f64,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("hermite order {n} exceeds limit {max}")]
    HermiteOrder { n: usize, max: usize },
    #[error("chirp evaluation needs |sin theta| >= {min}, got theta = {theta}")]
    ChirpSingular { theta: f64, min: f64 },
    #[error("internal consistency: {0}")]
    Consistency(String),
    #[error("empty sequence")]
    EmptySequence,
    #[error("ill-conditioned system (condition {cond:.3e}): {advice}")]
    IllConditioned { cond: f64, advice: String },
    #[error("no valid phase anchor")]
    NoPhaseAnchor,
    #[error("measurements inconsistent with rank-1 model (gap {gap:.3e})")]
    NotRankOne { gap: f64 },
    #[error("sampling set is not a product of an x-sequence and an affine frequency lattice")]
    NotProductSet,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
