//! Recovery of signals up to a global phase from lattice spectrogram samples.

mod compact;
mod shannon;
mod sis;
mod translates;

pub use compact::{reconstruct_compact, CompactReconConfig, PhaseMode};
pub use shannon::{correlation_direct, freq_correlation, shannon_interpolate, ShannonSlice};
pub use sis::{
    band_width, lift_sis_fit, reconstruct_sis, reconstruct_sis_fourier, synthesize_fourier_dual, LiftedGram,
    SisReconConfig,
};
pub use translates::{invert_gaussian_translates, RegConfig, TranslateSolution};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::SamplingSet;
use crate::signal::{canonical_phase, ComplexSignal, SisSpec};
use crate::spectrogram::spectrogram_sis_closed;
use crate::transforms::gabor::gabor_at;

/// Bits kept by the canonical-phase snap applied before forward sampling.
pub const CANONICAL_BITS: i32 = 32;

/// Additive Gaussian noise on the squared samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
}

/// `|Gf|^2` at the points of a sampling set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramSamples {
    pub set: SamplingSet,
    pub values: Vec<f64>,
    #[serde(default)]
    pub noise: Option<NoiseModel>,
}

impl SpectrogramSamples {
    pub fn new(set: SamplingSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != set.len() {
            return Err(Error::LengthMismatch {
                expected: set.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("sample {i} is negative or not finite")));
        }
        Ok(Self {
            set,
            values,
            noise: None,
        })
    }

    /// Ingests moduli `|Gf|` by squaring them.
    pub fn from_moduli(set: SamplingSet, moduli: Vec<f64>) -> Result<Self> {
        Self::new(set, moduli.into_iter().map(|v| v * v).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Adds `N(0, sigma^2)` noise and clips at zero.
    pub fn with_noise(mut self, noise: NoiseModel) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        let n = Normal::new(0.0, noise.sigma.max(0.0)).expect("nonnegative sigma");
        for v in &mut self.values {
            *v = (*v + n.sample(&mut rng)).max(0.0);
        }
        self.noise = Some(noise);
        self
    }

    /// Relative misfit `||pred - values|| / ||values||`, absolute when the samples vanish.
    pub fn relative_residual(&self, pred: &[f64]) -> f64 {
        let num: f64 = pred.iter().zip(&self.values).map(|(p, y)| (p - y) * (p - y)).sum();
        let den: f64 = self.values.iter().map(|y| y * y).sum();
        if den > 0.0 {
            (num / den).sqrt()
        } else {
            num.sqrt()
        }
    }
}

/// Diagnostics shared by both pipelines.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReconDiagnostics {
    /// Relative sample misfit of the returned signal.
    pub residual: f64,
    /// Condition numbers of the translate systems, one per solved lag.
    pub condition_estimates: Vec<f64>,
    pub phase_anchor: Option<f64>,
    pub rank1_gap: Option<f64>,
    /// Misfit of the direct proof pipeline before refinement.
    pub pipeline_residual: Option<f64>,
    /// Multistart batches used by the refinement.
    pub refine_batches: usize,
    pub warnings: Vec<String>,
}

/// Quadrature spectrogram of a grid signal at the set's points, after the canonical-phase snap.
pub fn sample_signal(f: &ComplexSignal, set: &SamplingSet) -> SpectrogramSamples {
    let canon = ComplexSignal::new(*f.grid(), canonical_phase(f.values(), CANONICAL_BITS)).expect("finite input");
    let values: Vec<f64> = set
        .points
        .par_iter()
        .map(|&(x, w)| gabor_at(&canon, x, w).norm_sqr())
        .collect();
    SpectrogramSamples {
        set: set.clone(),
        values,
        noise: None,
    }
}

/// Closed-form spectrogram of a shift-invariant signal at the set's points.
pub fn sample_sis(spec: &SisSpec, set: &SamplingSet) -> Result<SpectrogramSamples> {
    let canon = SisSpec::new(spec.beta, spec.k_min, canonical_phase(&spec.coeffs, CANONICAL_BITS))?;
    let values = set
        .points
        .par_iter()
        .map(|&(x, w)| spectrogram_sis_closed(&canon, x, w).map(|v| v.max(0.0)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SpectrogramSamples {
        set: set.clone(),
        values,
        noise: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_sampling_set, SequenceDescriptor};
    use crate::signal::{random_compact, random_sis, CompactClassSpec, Profile};
    use num_complex::Complex64 as C64;

    fn set() -> SamplingSet {
        build_sampling_set(
            &SequenceDescriptor::affine(1.0, 0.0).unwrap(),
            &SequenceDescriptor::affine(0.25, 0.0).unwrap(),
            0.0,
            3,
        )
        .unwrap()
    }

    #[test]
    fn samples_are_phase_blind() {
        let class = CompactClassSpec::new(2.0).unwrap();
        let f = random_compact(&class, 11, Profile::Nonvanishing, class.default_grid());
        let a = sample_signal(&f, &set());
        for alpha in [0.1, 1.0, 3.0] {
            let b = sample_signal(&f.scale(C64::from_polar(1.0, alpha)), &set());
            assert_eq!(a.values, b.values);
        }
        let spec = random_sis(2f64.sqrt(), -2, 5, 3, Profile::Smooth).unwrap();
        let s = sample_sis(&spec, &set()).unwrap();
        assert_eq!(s.values, sample_sis(&spec.scaled(C64::from_polar(1.0, 2.2)), &set()).unwrap().values);
    }

    #[test]
    fn moduli_are_squared() {
        let s = SpectrogramSamples::from_moduli(set(), vec![2.0; 49]).unwrap();
        assert!(s.values.iter().all(|v| *v == 4.0));
        assert!(SpectrogramSamples::new(set(), vec![-1.0; 49]).is_err());
        assert!(SpectrogramSamples::new(set(), vec![1.0; 3]).is_err());
    }

    #[test]
    fn noise_is_seeded_and_clipped() {
        let s = SpectrogramSamples::new(set(), vec![0.0; 49]).unwrap();
        let a = s.clone().with_noise(NoiseModel { sigma: 0.1, seed: 5 });
        let b = s.with_noise(NoiseModel { sigma: 0.1, seed: 5 });
        assert_eq!(a.values, b.values);
        assert!(a.values.iter().all(|v| *v >= 0.0));
        assert!(a.values.iter().any(|v| *v > 0.0));
    }
}
