//! Simulated homodyne detection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::quadrature::linspace;
use crate::state::{normal_density, StateModel};
use crate::tomogram::{QuadratureRecord, QuadratureSampleSet, SampleMetadata};

/// Generator used for every stream: ChaCha8 from `rand_chacha` 0.9, seeded
/// with the plan seed, one stream per phase index.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9); seed_from_u64(seed), stream = phase index";

/// Which phases to measure, how often, and how noisy the detector is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlanFields", into = "PlanFields")]
pub struct AcquisitionPlan {
    phases: Vec<f64>,
    samples_per_phase: usize,
    seed: u64,
    noise_sigma: f64,
}

#[derive(Serialize, Deserialize)]
struct PlanFields {
    phases: Vec<f64>,
    samples_per_phase: usize,
    seed: u64,
    #[serde(default)]
    noise_sigma: f64,
}

impl TryFrom<PlanFields> for AcquisitionPlan {
    type Error = TomoError;

    fn try_from(f: PlanFields) -> Result<Self> {
        AcquisitionPlan::new(f.phases, f.samples_per_phase, f.seed, f.noise_sigma)
    }
}

impl From<AcquisitionPlan> for PlanFields {
    fn from(p: AcquisitionPlan) -> Self {
        PlanFields {
            phases: p.phases,
            samples_per_phase: p.samples_per_phase,
            seed: p.seed,
            noise_sigma: p.noise_sigma,
        }
    }
}

impl AcquisitionPlan {
    pub fn new(phases: Vec<f64>, samples_per_phase: usize, seed: u64, noise_sigma: f64) -> Result<Self> {
        if phases.is_empty() {
            return Err(TomoError::InvalidParameter("acquisition plan has no phases".into()));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(TomoError::InvalidParameter("phases must be finite".into()));
        }
        if samples_per_phase == 0 {
            return Err(TomoError::InvalidParameter("samples_per_phase must be >= 1".into()));
        }
        if !noise_sigma.is_finite() || noise_sigma < 0.0 {
            return Err(TomoError::InvalidParameter(format!(
                "noise_sigma must be a non-negative number, got {noise_sigma}"
            )));
        }
        Ok(AcquisitionPlan {
            phases,
            samples_per_phase,
            seed,
            noise_sigma,
        })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn samples_per_phase(&self) -> usize {
        self.samples_per_phase
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }
}

/// Rejection sampler for a number state: proposals from N(0, (2n+1)/2),
/// accepted against c·g(x) with c = 1.1 × the largest f/g ratio on a
/// 2001-point grid over [−7, 7].
#[derive(Debug, Clone, Copy)]
pub struct FockSampler {
    state: StateModel,
    envelope_variance: f64,
    bound: f64,
}

impl FockSampler {
    pub fn new(n: u32) -> Self {
        let state = StateModel::Fock(crate::state::FockState::new(n));
        let envelope_variance = (2.0 * n as f64 + 1.0) / 2.0;
        let max_ratio = linspace(-7.0, 7.0, 2001)
            .into_iter()
            .map(|x| state.tomogram_density(0.0, x) / normal_density(x, 0.0, envelope_variance))
            .fold(0.0, f64::max);
        FockSampler {
            state,
            envelope_variance,
            bound: 1.1 * max_ratio,
        }
    }

    /// Expected fraction of accepted proposals.
    pub fn acceptance_rate(&self) -> f64 {
        1.0 / self.bound
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sd = self.envelope_variance.sqrt();
        loop {
            let z: f64 = rng.sample(StandardNormal);
            let x = sd * z;
            let u: f64 = rng.random();
            let envelope = self.bound * normal_density(x, 0.0, self.envelope_variance);
            if u * envelope <= self.state.tomogram_density(0.0, x) {
                return x;
            }
        }
    }
}

fn phase_rng(seed: u64, phase_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(phase_index as u64);
    rng
}

/// Draws `samples_per_phase` records at each phase of the plan.
///
/// Output is phase-major in plan order; each phase uses its own stream so
/// the result does not depend on scheduling.
pub fn acquire(state: &StateModel, plan: &AcquisitionPlan) -> QuadratureSampleSet {
    let fock = match state {
        StateModel::Fock(f) => {
            let s = FockSampler::new(f.n);
            log::debug!("fock n = {}: rejection acceptance rate {:.3}", f.n, s.acceptance_rate());
            Some(s)
        }
        StateModel::Gaussian(_) => None,
    };
    let per_phase: Vec<Vec<QuadratureRecord>> = plan
        .phases
        .par_iter()
        .enumerate()
        .map(|(k, &theta)| {
            let mut rng = phase_rng(plan.seed, k);
            let mean = state.quadrature_mean(theta);
            let sd = state.quadrature_variance(theta).sqrt();
            (0..plan.samples_per_phase)
                .map(|_| {
                    let mut x = match &fock {
                        Some(s) => s.sample(&mut rng),
                        None => {
                            let z: f64 = rng.sample(StandardNormal);
                            mean + sd * z
                        }
                    };
                    if plan.noise_sigma > 0.0 {
                        let z: f64 = rng.sample(StandardNormal);
                        x += plan.noise_sigma * z;
                    }
                    QuadratureRecord { theta, x }
                })
                .collect()
        })
        .collect();
    let records = per_phase.into_iter().flatten().collect();
    QuadratureSampleSet::new(
        records,
        SampleMetadata {
            source: format!("simulated homodyne acquisition of {}", describe(state)),
            seed: Some(plan.seed),
            rng: Some(RNG_NAME.to_string()),
        },
    )
}

fn describe(state: &StateModel) -> String {
    serde_json::to_string(state).unwrap_or_else(|_| format!("{state:?}"))
}
