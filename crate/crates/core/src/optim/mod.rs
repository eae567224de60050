//! Coherence minimization over the sampling angles.
//!
//! Two optimizers share the same machinery: [`gd_optimize`] runs gradient
//! descent on the ℓp smoothing of the coherence, and [`alm_optimize`] runs an
//! augmented-Lagrangian scheme that splits the pair correlations into an
//! auxiliary vector handled by the ℓ∞ proximal map. Both track the
//! best-so-far coherence and keep the best of several random restarts.

mod alm;
mod gd;
mod objective;
mod prox;

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use alm::{alm_optimize, alm_restart, AlmConfig, AlmState, DualUpdate};
pub use gd::{gd_optimize, gd_restart, GdConfig};
pub use objective::{lp_gradient, lp_objective, AngleGradient};
pub use prox::{project_l1, prox_linf};

use crate::error::{Error, Result};
use crate::modes::{ModeKind, ModeTable};
use crate::rng;
use crate::sampling::{apply_chi, random_uniform_with, wrap_triplets, ChiPolicy, Provenance, SamplingSet};
use crate::scalar::Real;
use crate::specfun::Angle;
use objective::{Frame, Jets};

/// Which angle blocks the optimizer moves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String", bound = "")]
pub enum ChiMode<T: Real> {
    /// Optimize `theta`, `phi` and `chi`.
    Free,
    /// Assign `chi` once by the policy and keep it frozen.
    FixedPolicy(ChiPolicy<T>),
}

impl<T: Real> ChiMode<T> {
    /// `AlternatePair` for the first-order probe basis, `Free` otherwise.
    pub fn default_for(kind: ModeKind) -> Self {
        match kind {
            ModeKind::SnfMuPm1 => ChiMode::FixedPolicy(ChiPolicy::AlternatePair),
            _ => ChiMode::Free,
        }
    }

    fn frozen(&self) -> bool {
        matches!(self, ChiMode::FixedPolicy(_))
    }

    fn paired(&self) -> bool {
        matches!(self, ChiMode::FixedPolicy(ChiPolicy::AlternatePair))
    }
}

impl<T: Real> fmt::Display for ChiMode<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChiMode::Free => f.write_str("free"),
            ChiMode::FixedPolicy(p) => write!(f, "fixed_policy:{p}"),
        }
    }
}

impl<T: Real> FromStr for ChiMode<T> {
    type Err = Error;

    /// `free`, or a chi policy (`even`, `alternate`, `fixed:<v>`), optionally
    /// prefixed by `fixed_policy:`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "free" {
            return Ok(ChiMode::Free);
        }
        let rest = t.strip_prefix("fixed_policy:").unwrap_or(&t);
        Ok(ChiMode::FixedPolicy(rest.parse()?))
    }
}

impl<T: Real> From<ChiMode<T>> for String {
    fn from(m: ChiMode<T>) -> String {
        m.to_string()
    }
}

impl<T: Real> TryFrom<String> for ChiMode<T> {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Result of a single restart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RestartSummary<T: Real> {
    pub restart: usize,
    pub init_mu: T,
    pub best_mu: T,
    /// Best-so-far coherence; entry 0 is the initial coherence.
    pub rho_trace: Vec<T>,
    /// `Σ_j |z_j − g_j|` after each outer iteration (ALM only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residual_trace: Vec<T>,
    pub iterations_used: usize,
    #[serde(skip)]
    pub best_angles: Option<SamplingSet<T>>,
}

/// Configuration echo stored with a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case", bound = "")]
pub enum OptimizerConfig<T: Real> {
    Gd(GdConfig<T>),
    Alm(AlmConfig<T>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct OptimizerRun<T: Real> {
    pub config: OptimizerConfig<T>,
    pub best_angles: SamplingSet<T>,
    /// Trace of the winning restart; non-increasing, last entry is `best_mu`.
    pub rho_trace: Vec<T>,
    pub best_mu: T,
    pub iterations_used: usize,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary<T>>,
}

/// Wraps raw angle vectors: `phi` and `chi` mod `2 pi`, `theta` reflected
/// into `[0, pi]` with `phi += pi` on each reflection.
pub fn wrap_angles<T: Real>(theta: Vec<T>, phi: Vec<T>, chi: Vec<T>, provenance: Provenance) -> Result<SamplingSet<T>> {
    SamplingSet::new_keep_chi(theta, phi, chi, provenance)
}

fn pick_best<T: Real>(config: OptimizerConfig<T>, mut runs: Vec<RestartSummary<T>>) -> OptimizerRun<T> {
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.best_mu < runs[best].best_mu {
            best = i;
        }
    }
    let best_angles = runs[best].best_angles.take().expect("restart keeps its best angles");
    let r = &runs[best];
    OptimizerRun {
        config,
        best_angles,
        rho_trace: r.rho_trace.clone(),
        best_mu: r.best_mu,
        iterations_used: r.iterations_used,
        best_restart: best,
        restarts: runs,
    }
}

/// Random initial set for one restart, with the polarization policy applied.
pub(crate) fn initial_samples<T: Real>(k: usize, chi_mode: &ChiMode<T>, seed: u64, restart: usize) -> Result<SamplingSet<T>> {
    let mut r = rng::stream(seed, &[rng::tag::OPTIMIZER, rng::tag::INIT, restart as u64]);
    match chi_mode {
        ChiMode::Free => random_uniform_with(k, &mut r),
        ChiMode::FixedPolicy(ChiPolicy::AlternatePair) => {
            if k % 2 != 0 {
                return Err(Error::invalid(format!("alternate-pair polarization needs an even sample count, got {k}")));
            }
            let base: SamplingSet<T> = random_uniform_with(k / 2, &mut r)?;
            apply_chi(&base.duplicate_pairs(), ChiPolicy::AlternatePair)
        }
        ChiMode::FixedPolicy(p) => apply_chi(&random_uniform_with(k, &mut r)?, *p),
    }
}

/// Moves the samples by `-step · grad` on the active blocks and wraps.
pub(crate) fn take_step<T: Real>(
    samples: &SamplingSet<T>,
    grad: &AngleGradient<T>,
    step: T,
    chi_mode: &ChiMode<T>,
    provenance: Provenance,
) -> SamplingSet<T> {
    let k = samples.len();
    let mut theta: Vec<T> = (0..k).map(|i| samples.theta()[i] - step * grad.theta[i]).collect();
    let mut phi: Vec<T> = (0..k).map(|i| samples.phi()[i] - step * grad.phi[i]).collect();
    if chi_mode.frozen() {
        // no reflection through the poles: with chi frozen it would change the row
        for i in 0..k {
            theta[i] = theta[i].max(T::zero()).min(T::PI());
            phi[i] = Angle(phi[i]).azimuthal().radians();
        }
        SamplingSet::new_keep_chi(theta, phi, samples.chi().to_vec(), provenance).expect("finite angles")
    } else {
        let chi: Vec<T> = (0..k).map(|i| samples.chi()[i] - step * grad.chi[i]).collect();
        let (theta, phi, chi) = wrap_triplets(theta, phi, chi, true);
        SamplingSet::new_keep_chi(theta, phi, chi, provenance).expect("finite angles")
    }
}

/// Restricts a raw gradient to the blocks the chi mode lets move.
pub(crate) fn mask_gradient<T: Real>(grad: &mut AngleGradient<T>, chi_mode: &ChiMode<T>) {
    if chi_mode.frozen() {
        grad.chi.iter_mut().for_each(|g| *g = T::zero());
    }
    if chi_mode.paired() {
        // rows 2i and 2i+1 share one spatial point
        for block in [&mut grad.theta, &mut grad.phi] {
            for pair in block.chunks_mut(2) {
                let s = pair.iter().copied().sum::<T>();
                pair.iter_mut().for_each(|g| *g = s);
            }
        }
    }
}

/// Frame of `samples`, re-perturbing the spatial angles while some column
/// vanishes at every sample.
pub(crate) fn frame_with_perturbation<T: Real>(
    table: &ModeTable,
    mut samples: SamplingSet<T>,
    chi_mode: &ChiMode<T>,
    seed: u64,
    restart: usize,
) -> Result<(SamplingSet<T>, Frame<T>)> {
    let noise = Normal::new(0.0, 1e-3).expect("valid normal");
    for attempt in 0..16u64 {
        match Frame::new(table, &samples) {
            Ok(f) => return Ok((samples, f)),
            Err(Error::DegenerateColumn { .. }) => {
                let mut r = rng::stream(seed, &[rng::tag::OPTIMIZER, rng::tag::PERTURB, restart as u64, attempt]);
                let k = samples.len();
                let mut grad = AngleGradient::zeros(k);
                for i in 0..k {
                    grad.theta[i] = T::lit(noise.sample(&mut r));
                    grad.phi[i] = T::lit(noise.sample(&mut r));
                    grad.chi[i] = T::lit(noise.sample(&mut r));
                }
                mask_gradient(&mut grad, chi_mode);
                samples = take_step(&samples, &grad, T::one(), chi_mode, samples.provenance());
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::domain("initial samples stay degenerate after perturbation"))
}

/// Gradient of an objective given by its weight matrix, masked for the chi mode.
pub(crate) fn masked_gradient<T: Real>(
    table: &ModeTable,
    samples: &SamplingSet<T>,
    frame: &Frame<T>,
    weights: &ndarray::Array2<num_complex::Complex<T>>,
    chi_mode: &ChiMode<T>,
) -> AngleGradient<T> {
    let jets = Jets::new(table, samples);
    let mut g = objective::backprop(frame, &jets, weights);
    mask_gradient(&mut g, chi_mode);
    g
}

/// Backtracking line search along `-grad`.
///
/// Starts from `min(eta, 2·last)` and halves up to 20 times until `value`
/// decreases. Returns the accepted point with its frame, value and step.
pub(crate) fn backtrack<T: Real, F>(
    table: &ModeTable,
    samples: &SamplingSet<T>,
    grad: &AngleGradient<T>,
    current: T,
    eta: T,
    last_step: T,
    chi_mode: &ChiMode<T>,
    provenance: Provenance,
    value: F,
) -> Option<(SamplingSet<T>, Frame<T>, T, T)>
where
    F: Fn(&Frame<T>) -> T,
{
    if !(eta > T::zero()) || grad.norm_sqr() == T::zero() {
        return None;
    }
    let mut step = eta.min(last_step * T::lit(2.0));
    for _ in 0..=20 {
        let trial = take_step(samples, grad, step, chi_mode, provenance);
        if let Ok(frame) = Frame::new(table, &trial) {
            let v = value(&frame);
            if v < current {
                return Some((trial, frame, v, step));
            }
        }
        step = step / T::lit(2.0);
    }
    None
}

fn validate_common<T: Real>(kind: ModeKind, degree: u32, k: usize, restarts: usize, chi_mode: &ChiMode<T>) -> Result<ModeTable> {
    if k == 0 {
        return Err(Error::invalid("the optimizer needs at least one sample"));
    }
    if restarts == 0 {
        return Err(Error::invalid("restarts must be at least 1"));
    }
    if chi_mode.paired() && k % 2 != 0 {
        return Err(Error::invalid(format!("alternate-pair polarization needs an even sample count, got {k}")));
    }
    let table = crate::modes::mode_table(kind, degree)?;
    if table.len() < 2 {
        return Err(Error::invalid("coherence needs at least two columns"));
    }
    Ok(table)
}
