//! Experiment drivers: coherence-versus-K tables, phase-transition grids and
//! the synthetic far-field reconstruction pipeline.
//!
//! Everything here runs in `f64`. Independent jobs (draws, cells, trials)
//! run on the rayon pool and are reduced in index order, so results do not
//! depend on the number of threads.

mod coherence;
mod farfield;
mod phase;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use coherence::{coherence_benchmark, write_coherence_csv, CoherenceRow};
pub use farfield::{
    farfield_cut, farfield_demo, farfield_error, synth_forward, write_cut_csv, write_farfield_csv, FarfieldConfig,
    FarfieldReport, FarfieldRow, PatternCut, SmcModel, SyntheticSmc,
};
pub use phase::{phase_transition, write_phase_csv, Contour, PhaseGridConfig, PhaseGridResult};

use crate::error::{Error, Result};
use crate::modes::ModeKind;
use crate::optim::{alm_optimize, gd_optimize, AlmConfig, GdConfig};
use crate::rng;
use crate::sampling::{apply_chi, hammersley, random_uniform_with, spiral, ChiPolicy, SamplingSet};

/// Source of the sampling points in an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Spiral,
    Hammersley,
    Random,
    OptimizedGd,
    OptimizedAlm,
}

impl Sampler {
    pub const ALL: [Sampler; 5] =
        [Sampler::Spiral, Sampler::Hammersley, Sampler::Random, Sampler::OptimizedGd, Sampler::OptimizedAlm];

    pub fn name(self) -> &'static str {
        match self {
            Sampler::Spiral => "spiral",
            Sampler::Hammersley => "hammersley",
            Sampler::Random => "random",
            Sampler::OptimizedGd => "optimized_gd",
            Sampler::OptimizedAlm => "optimized_alm",
        }
    }

    /// Whether two calls with different seeds give different sets.
    pub fn is_random(self) -> bool {
        !matches!(self, Sampler::Spiral | Sampler::Hammersley)
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "spiral" => Ok(Sampler::Spiral),
            "hammersley" => Ok(Sampler::Hammersley),
            "random" | "uniform" => Ok(Sampler::Random),
            "optimized_gd" | "gd" => Ok(Sampler::OptimizedGd),
            "optimized_alm" | "alm" => Ok(Sampler::OptimizedAlm),
            other => Err(Error::Parse(format!("unknown sampler '{other}'"))),
        }
    }
}

/// Work limits for the optimized samplers; unset fields keep the optimizer
/// defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerBudget {
    pub restarts: Option<usize>,
    pub gd_iterations: Option<usize>,
    pub alm_iterations: Option<usize>,
    pub alm_inner_iters: Option<usize>,
}

impl OptimizerBudget {
    pub fn gd_config(&self, kind: ModeKind, degree: u32, k: usize, seed: u64) -> GdConfig<f64> {
        let mut c = GdConfig::new(kind, degree, k);
        c.seed = seed;
        if let Some(r) = self.restarts {
            c.restarts = r;
        }
        if let Some(t) = self.gd_iterations {
            c.iterations = t;
        }
        c
    }

    pub fn alm_config(&self, kind: ModeKind, degree: u32, k: usize, seed: u64) -> AlmConfig<f64> {
        let mut c = AlmConfig::new(kind, degree, k);
        c.seed = seed;
        if let Some(r) = self.restarts {
            c.restarts = r;
        }
        if let Some(t) = self.alm_iterations {
            c.iterations = t;
        }
        if let Some(t) = self.alm_inner_iters {
            c.inner_iters = t;
        }
        c
    }
}

/// Polarization used with a fixed generator for `kind`: even spread for the
/// general basis, alternating pairs for the first-order probe basis, and
/// `chi = 0` for harmonics (which ignore it).
pub fn default_chi_policy(kind: ModeKind) -> ChiPolicy<f64> {
    match kind {
        ModeKind::WignerGeneral => ChiPolicy::EvenSpread,
        ModeKind::SphericalHarmonics => ChiPolicy::Fixed(0.0),
        ModeKind::SnfMuPm1 => ChiPolicy::AlternatePair,
    }
}

/// `K` samples from `sampler` for the given basis.
///
/// Under alternating pairs the generator places `K/2` spatial points and each
/// is measured twice. `seed` only matters for random and optimized samplers.
pub fn sampler_set(
    sampler: Sampler,
    kind: ModeKind,
    degree: u32,
    k: usize,
    seed: u64,
    budget: &OptimizerBudget,
) -> Result<SamplingSet<f64>> {
    let policy = default_chi_policy(kind);
    let paired = policy == ChiPolicy::AlternatePair;
    if paired && k % 2 != 0 {
        return Err(Error::invalid(format!("alternate-pair polarization needs an even sample count, got {k}")));
    }
    let spatial = if paired { k / 2 } else { k };
    let fixed = |s: SamplingSet<f64>| -> Result<SamplingSet<f64>> {
        let s = if paired { s.duplicate_pairs() } else { s };
        apply_chi(&s, policy)
    };
    match sampler {
        Sampler::Spiral => fixed(spiral(spatial)?),
        Sampler::Hammersley => fixed(hammersley(spatial)?),
        Sampler::Random => {
            let mut r = rng::stream(seed, &[rng::tag::SAMPLES]);
            let s = random_uniform_with(spatial, &mut r)?;
            // random polarization for the general basis, as the optimizers start from
            if kind == ModeKind::WignerGeneral {
                Ok(s)
            } else {
                fixed(s)
            }
        }
        Sampler::OptimizedGd => Ok(gd_optimize(&budget.gd_config(kind, degree, k, seed))?.best_angles),
        Sampler::OptimizedAlm => Ok(alm_optimize(&budget.alm_config(kind, degree, k, seed))?.best_angles),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_names_round_trip() {
        for s in Sampler::ALL {
            assert_eq!(s.name().parse::<Sampler>().unwrap(), s);
        }
        assert!("zigzag".parse::<Sampler>().is_err());
    }

    #[test]
    fn paired_sets_repeat_points() {
        let s = sampler_set(Sampler::Spiral, ModeKind::SnfMuPm1, 2, 10, 0, &OptimizerBudget::default()).unwrap();
        assert_eq!(s.len(), 10);
        assert_eq!(s.theta()[2], s.theta()[3]);
        assert_eq!(s.chi()[3], std::f64::consts::FRAC_PI_2);
        assert!(sampler_set(Sampler::Spiral, ModeKind::SnfMuPm1, 2, 9, 0, &OptimizerBudget::default()).is_err());
    }
}
