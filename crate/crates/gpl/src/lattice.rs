//! Sampling sets and the validators for their density hypotheses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transforms::frft::rotate;

/// Symbolic real sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeqKind {
    /// `a Z + b`.
    Affine { a: f64, b: f64 },
    /// `s N + a`, `N = {0, 1, 2, ...}`.
    HalfLine { s: i8, a: i64 },
    /// `{sign(n) |n|^p : n in Z}`.
    Power { p: f64 },
    /// Sorted, distinct finite list.
    Explicit { values: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceDescriptor {
    #[serde(flatten)]
    pub kind: SeqKind,
    /// Materialize indices `|n| <= truncation` (`0..=truncation` for half lines).
    #[serde(default)]
    pub truncation: Option<usize>,
}

impl SequenceDescriptor {
    pub fn new(kind: SeqKind, truncation: Option<usize>) -> Result<Self> {
        match &kind {
            SeqKind::Affine { a, b } => {
                if *a == 0.0 || !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidParameter(format!("affine step must be nonzero and finite, got {a}")));
                }
            }
            SeqKind::HalfLine { s, .. } => {
                if s.abs() != 1 {
                    return Err(Error::InvalidParameter(format!("half-line sign must be +1 or -1, got {s}")));
                }
            }
            SeqKind::Power { p } => {
                if !(*p > 0.0) {
                    return Err(Error::InvalidParameter(format!("power exponent must be positive, got {p}")));
                }
            }
            SeqKind::Explicit { values } => {
                if values.is_empty() {
                    return Err(Error::EmptySequence);
                }
                if values.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidParameter("explicit list must be sorted and distinct".into()));
                }
            }
        }
        Ok(Self { kind, truncation })
    }

    pub fn affine(a: f64, b: f64) -> Result<Self> {
        Self::new(SeqKind::Affine { a, b }, None)
    }

    pub fn half_line(s: i8, a: i64) -> Result<Self> {
        Self::new(SeqKind::HalfLine { s, a }, None)
    }

    pub fn power(p: f64) -> Result<Self> {
        Self::new(SeqKind::Power { p }, None)
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        Self::new(SeqKind::Explicit { values }, None)
    }

    pub fn truncated(mut self, n: usize) -> Self {
        self.truncation = Some(n);
        self
    }

    /// Elements in index order.
    pub fn materialize(&self, default_n: usize) -> Vec<f64> {
        let n = self.truncation.unwrap_or(default_n) as i64;
        match &self.kind {
            SeqKind::Affine { a, b } => (-n..=n).map(|i| a * i as f64 + b).collect(),
            SeqKind::HalfLine { s, a } => (0..=n).map(|i| (*s as i64 * i + a) as f64).collect(),
            SeqKind::Power { p } => (-n..=n)
                .map(|i| (i as f64).signum() * (i.abs() as f64).powf(*p))
                .collect(),
            SeqKind::Explicit { values } => values.clone(),
        }
    }

    /// Spacing when the sequence is an affine lattice.
    pub fn affine_step(&self) -> Option<f64> {
        match self.kind {
            SeqKind::Affine { a, .. } => Some(a.abs()),
            _ => None,
        }
    }
}

/// Truncated, optionally rotated product set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingSet {
    pub x_seq: SequenceDescriptor,
    pub w_seq: SequenceDescriptor,
    pub theta: f64,
    /// Points `R_theta (x, w)`, x index outer, w index inner.
    pub points: Vec<(f64, f64)>,
    /// Unrotated factors.
    pub x_values: Vec<f64>,
    pub w_values: Vec<f64>,
}

impl SamplingSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Point before rotation for flat index `i`.
    pub fn unrotated(&self, i: usize) -> (f64, f64) {
        let m = self.w_values.len();
        (self.x_values[i / m], self.w_values[i % m])
    }
}

/// Materializes `R_theta (x_seq x w_seq)`; descriptors without their own truncation use `n`.
pub fn build_sampling_set(x: &SequenceDescriptor, w: &SequenceDescriptor, theta: f64, n: usize) -> Result<SamplingSet> {
    if n < 1 {
        return Err(Error::InvalidParameter("truncation must be at least 1".into()));
    }
    let xs = x.materialize(n);
    let ws = w.materialize(n);
    if xs.is_empty() || ws.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut points = Vec::with_capacity(xs.len() * ws.len());
    for &a in &xs {
        for &b in &ws {
            points.push(if theta == 0.0 { (a, b) } else { rotate(theta, (a, b)) });
        }
    }
    Ok(SamplingSet {
        x_seq: x.clone(),
        w_seq: w.clone(),
        theta,
        points,
        x_values: xs,
        w_values: ws,
    })
}

/// How a density value was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum DensityMethod {
    Exact,
    /// Density of a half line measured on its own side.
    SupportSide,
    /// Minimum count per length over windows of length `window` inside `[lo, hi]`.
    Windowed { window: f64, lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub value: f64,
    #[serde(flatten)]
    pub method: DensityMethod,
}

/// Lower Beurling density `liminf_r inf_a #(seq in [a, a+r)) / r`.
pub fn lower_beurling_density(seq: &SequenceDescriptor) -> DensityEstimate {
    match &seq.kind {
        SeqKind::Affine { a, .. } => DensityEstimate {
            value: 1.0 / a.abs(),
            method: DensityMethod::Exact,
        },
        SeqKind::HalfLine { .. } => DensityEstimate {
            value: 1.0,
            method: DensityMethod::SupportSide,
        },
        _ => {
            let mut v = seq.materialize(64);
            v.sort_by(f64::total_cmp);
            windowed_density(&v)
        }
    }
}

fn windowed_density(sorted: &[f64]) -> DensityEstimate {
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let extent = hi - lo;
    if extent <= 0.0 {
        return DensityEstimate {
            value: 0.0,
            method: DensityMethod::Windowed { window: 0.0, lo, hi },
        };
    }
    let r = (extent / 16.0).max(1.0).min(extent);
    // Windows (t_i, t_i + r] starting just after each point, plus one anchored at lo.
    let mut min_count = usize::MAX;
    let mut j = 0;
    for i in 0..sorted.len() {
        let a = sorted[i];
        if a + r > hi {
            break;
        }
        if j < i + 1 {
            j = i + 1;
        }
        while j < sorted.len() && sorted[j] <= a + r {
            j += 1;
        }
        let c = j - (i + 1);
        min_count = min_count.min(c);
    }
    if min_count == usize::MAX {
        min_count = sorted.len();
    }
    DensityEstimate {
        value: min_count as f64 / r,
        method: DensityMethod::Windowed { window: r, lo, hi },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesVerdict {
    Diverges,
    Converges,
    Indeterminate,
}

/// Decides `sum' |lambda_n|^{-e}` with `e = 1` when `eps = 0` and `e = 2 + eps` otherwise.
pub fn reciprocal_series_check(seq: &SequenceDescriptor, eps: f64) -> SeriesVerdict {
    let e = if eps == 0.0 { 1.0 } else { 2.0 + eps };
    match &seq.kind {
        SeqKind::Affine { .. } | SeqKind::HalfLine { .. } => {
            if e <= 1.0 {
                SeriesVerdict::Diverges
            } else {
                SeriesVerdict::Converges
            }
        }
        SeqKind::Power { p } => {
            if p * e <= 1.0 {
                SeriesVerdict::Diverges
            } else {
                SeriesVerdict::Converges
            }
        }
        SeqKind::Explicit { .. } => SeriesVerdict::Indeterminate,
    }
}

/// Arithmetic status of `beta`, which a float cannot carry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum BetaTag {
    Rational { p: i64, q: i64 },
    Irrational { symbol: String },
    Unspecified,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Beta {
    pub value: f64,
    #[serde(flatten)]
    pub tag: BetaTag,
}

impl Beta {
    pub fn rational(p: i64, q: i64) -> Self {
        Self {
            value: p as f64 / q as f64,
            tag: BetaTag::Rational { p, q },
        }
    }

    pub fn irrational(value: f64, symbol: &str) -> Self {
        Self {
            value,
            tag: BetaTag::Irrational { symbol: symbol.into() },
        }
    }

    pub fn sqrt2() -> Self {
        Self::irrational(2f64.sqrt(), "sqrt2")
    }

    pub fn unspecified(value: f64) -> Self {
        Self {
            value,
            tag: BetaTag::Unspecified,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum WeylVerdict {
    Dense,
    NotDense { residues: Option<usize> },
    Empirical { fill_ratio: f64, max_gap: f64 },
}

fn integer_valued(x: f64) -> bool {
    x == x.round()
}

/// Whether `seq mod 2/beta` is dense in `[0, 2/beta]`.
pub fn weyl_density_check(seq: &SequenceDescriptor, beta: &Beta) -> WeylVerdict {
    let integer_step = match seq.kind {
        SeqKind::Affine { a, b } => integer_valued(a) && integer_valued(b),
        SeqKind::HalfLine { .. } => true,
        _ => false,
    };
    if integer_step {
        match &beta.tag {
            BetaTag::Rational { p, q } => {
                // n beta/2 mod 1 takes at most 2q/gcd values.
                let step = match seq.kind {
                    SeqKind::Affine { a, .. } => a.abs() as i64,
                    _ => 1,
                };
                let num = step * p;
                let den = 2 * q;
                let g = gcd(num.abs(), den.abs()).max(1);
                return WeylVerdict::NotDense {
                    residues: Some((den / g) as usize),
                };
            }
            BetaTag::Irrational { .. } => return WeylVerdict::Dense,
            BetaTag::Unspecified => {}
        }
    }
    let period = 2.0 / beta.value;
    let mut r: Vec<f64> = seq
        .materialize(10_000)
        .into_iter()
        .map(|v| v.rem_euclid(period))
        .collect();
    r.sort_by(f64::total_cmp);
    r.dedup();
    let mut max_gap = period - r[r.len() - 1] + r[0];
    for w in r.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    WeylVerdict::Empirical {
        fill_ratio: 1.0 - max_gap / period,
        max_gap,
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Signal class for validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum SignalClass {
    Compact { c: f64 },
    ShiftInvariant { beta: Beta },
}

/// Uniqueness statement whose hypotheses are checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Compact support, integer times a Nyquist frequency lattice.
    CompactLattice,
    /// Compact support, general time nodes times a frequency uniqueness set.
    CompactProduct,
    /// Shift-invariant space, dense time nodes times the integers.
    SisLattice,
    /// Shift-invariant space, frequency nodes dense modulo `2/beta`.
    SisDense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub theorem: Theorem,
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Fail)
    }
}

/// Checks the density and divergence hypotheses for a class and a sampling set.
///
/// Rotated sets are checked through their unrotated factors, which is the statement for the
/// correspondingly rotated class.
pub fn validate_uniqueness_config(class: &SignalClass, set: &SamplingSet) -> ValidationReport {
    let mut checks = Vec::new();
    match class {
        SignalClass::Compact { c } => {
            let theorem = if matches!(set.x_seq.kind, SeqKind::Affine { a, .. } if a.abs() == 1.0) {
                Theorem::CompactLattice
            } else {
                Theorem::CompactProduct
            };
            let s = reciprocal_series_check(&set.x_seq, 0.0);
            checks.push(HypothesisCheck {
                name: "time_nodes_reciprocal_series_diverges".into(),
                verdict: match s {
                    SeriesVerdict::Diverges => Verdict::Pass,
                    SeriesVerdict::Converges => Verdict::Fail,
                    SeriesVerdict::Indeterminate => Verdict::Indeterminate,
                },
                detail: format!("sum' |x_n|^-1: {s:?}"),
            });
            let (verdict, detail) = match set.w_seq.affine_step() {
                Some(step) => {
                    let d = 1.0 / step;
                    let need = 2.0 * c;
                    (
                        if d >= need * (1.0 - 1e-12) { Verdict::Pass } else { Verdict::Fail },
                        format!("frequency lattice density {d} vs required {need}"),
                    )
                }
                None => (
                    Verdict::Indeterminate,
                    "frequency nodes are not an affine lattice; only the lattice sufficient condition is decided".into(),
                ),
            };
            checks.push(HypothesisCheck {
                name: "frequency_nodes_uniqueness_set".into(),
                verdict,
                detail,
            });
            ValidationReport { theorem, checks }
        }
        SignalClass::ShiftInvariant { beta } => {
            let theorem = if matches!(set.w_seq.kind, SeqKind::Affine { a, b } if a.abs() == 1.0 && b == 0.0) {
                Theorem::SisLattice
            } else {
                Theorem::SisDense
            };
            let d = lower_beurling_density(&set.x_seq);
            let need = 2.0 / beta.value;
            let verdict = match d.method {
                DensityMethod::Exact => {
                    if d.value > need {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    }
                }
                DensityMethod::SupportSide => Verdict::Fail,
                DensityMethod::Windowed { .. } => Verdict::Indeterminate,
            };
            checks.push(HypothesisCheck {
                name: "time_nodes_lower_density".into(),
                verdict,
                detail: format!("D- = {} ({:?}) vs required > {need}", d.value, d.method),
            });
            let w = weyl_density_check(&set.w_seq, beta);
            let verdict = match &w {
                WeylVerdict::Dense => Verdict::Pass,
                WeylVerdict::NotDense { .. } => Verdict::Fail,
                WeylVerdict::Empirical { .. } => Verdict::Indeterminate,
            };
            checks.push(HypothesisCheck {
                name: "frequency_nodes_dense_mod_period".into(),
                verdict,
                detail: format!("{w:?}"),
            });
            ValidationReport { theorem, checks }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn build_examples() {
        let c = 1.0;
        let s = build_sampling_set(
            &SequenceDescriptor::affine(1.0, 0.0).unwrap(),
            &SequenceDescriptor::affine(1.0 / (2.0 * c), 0.0).unwrap(),
            0.0,
            2,
        )
        .unwrap();
        assert_eq!(s.len(), 25);
        for p in [(0.0, 0.0), (1.0, 0.5), (-2.0, -1.0)] {
            assert!(s.points.contains(&p));
        }
        assert_eq!(s.points[0], (-2.0, -1.0));
        assert_eq!(s.points[1], (-2.0, -0.5));

        let h = build_sampling_set(
            &SequenceDescriptor::half_line(1, 0).unwrap(),
            &SequenceDescriptor::affine(0.5, 0.0).unwrap(),
            0.0,
            5,
        )
        .unwrap();
        assert!(h.points.iter().all(|p| p.0 >= 0.0));
    }

    #[test]
    fn quarter_rotation_swaps_factors() {
        let x = SequenceDescriptor::affine(1.0, 0.0).unwrap();
        let w = SequenceDescriptor::affine(0.5, 0.0).unwrap();
        let r = build_sampling_set(&x, &w, FRAC_PI_2, 3).unwrap();
        let q = |v: f64| (v * 1e9).round() as i64;
        let mut got: Vec<(i64, i64)> = r.points.iter().map(|p| (q(-p.0), q(p.1))).collect();
        got.sort();
        let swapped = build_sampling_set(&w, &x, 0.0, 3).unwrap();
        let mut want: Vec<(i64, i64)> = swapped.points.iter().map(|p| (q(p.0), q(p.1))).collect();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn density_examples() {
        let d = lower_beurling_density(&SequenceDescriptor::affine(0.5, 0.0).unwrap());
        assert_eq!(d.value, 2.0);
        let beta = 2f64.sqrt();
        let eps = 0.5;
        let d = lower_beurling_density(&SequenceDescriptor::affine(beta / (2.0 + eps), 0.3).unwrap());
        assert!(d.value > 2.0 / beta);
        assert!((d.value - (2.0 + eps) / beta).abs() < 1e-15);
        let mut last = f64::INFINITY;
        for n in [16, 64, 256] {
            let e = lower_beurling_density(&SequenceDescriptor::power(2.0).unwrap().truncated(n));
            assert!(matches!(e.method, DensityMethod::Windowed { .. }));
            assert!(e.value < last);
            last = e.value;
        }
        assert!(last < 0.01);
    }

    #[test]
    fn series_examples() {
        assert_eq!(reciprocal_series_check(&SequenceDescriptor::affine(1.0, 0.0).unwrap(), 0.0), SeriesVerdict::Diverges);
        assert_eq!(reciprocal_series_check(&SequenceDescriptor::power(2.0).unwrap(), 0.0), SeriesVerdict::Converges);
        assert_eq!(reciprocal_series_check(&SequenceDescriptor::power(0.5).unwrap(), 0.0), SeriesVerdict::Diverges);
        for seq in [
            SequenceDescriptor::affine(1.0, 0.0).unwrap(),
            SequenceDescriptor::affine(0.3, 0.1).unwrap(),
            SequenceDescriptor::half_line(-1, 2).unwrap(),
        ] {
            assert_eq!(reciprocal_series_check(&seq, 0.25), SeriesVerdict::Converges);
        }
        assert_eq!(
            reciprocal_series_check(&SequenceDescriptor::explicit(vec![1.0, 2.0]).unwrap(), 0.0),
            SeriesVerdict::Indeterminate
        );
    }

    #[test]
    fn weyl_examples() {
        let z = SequenceDescriptor::affine(1.0, 0.0).unwrap();
        assert_eq!(weyl_density_check(&z, &Beta::sqrt2()), WeylVerdict::Dense);
        assert_eq!(
            weyl_density_check(&z, &Beta::rational(1, 1)),
            WeylVerdict::NotDense { residues: Some(2) }
        );
        let n = 10_000;
        match weyl_density_check(&z.clone().truncated(n), &Beta::unspecified(2f64.sqrt())) {
            WeylVerdict::Empirical { max_gap, .. } => {
                assert!(max_gap < 3.0 * (2.0 / 2f64.sqrt()) / n as f64);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn validator_examples() {
        let z = SequenceDescriptor::affine(1.0, 0.0).unwrap();
        let set = build_sampling_set(&z, &SequenceDescriptor::affine(0.5, 0.0).unwrap(), 0.0, 4).unwrap();
        assert!(validate_uniqueness_config(&SignalClass::Compact { c: 1.0 }, &set).passed());

        let b = 2f64.sqrt();
        let class = SignalClass::ShiftInvariant { beta: Beta::sqrt2() };
        let good = build_sampling_set(&SequenceDescriptor::affine(b / 2.5, 0.0).unwrap(), &z, 0.0, 4).unwrap();
        let r = validate_uniqueness_config(&class, &good);
        assert!(r.passed());
        assert_eq!(r.theorem, Theorem::SisLattice);

        let sparse = build_sampling_set(&SequenceDescriptor::affine(2.0 * b, 0.0).unwrap(), &z, 0.0, 4).unwrap();
        let r = validate_uniqueness_config(&class, &sparse);
        assert!(r.failed());
        assert_eq!(r.checks[0].verdict, Verdict::Fail);
        assert_eq!(r.checks[1].verdict, Verdict::Pass);
    }
}
