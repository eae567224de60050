//! Augmented-Lagrangian coherence minimization.
//!
//! The pair correlations `g_j = C_{r(j) q(j)}` are split into an auxiliary
//! vector `z` with the constraint `z = g(angles)`, giving
//! `min λ‖z‖∞ + τ/2 ‖z − g + u‖²` in scaled form. Each outer iteration takes
//! one proximal-gradient step on `z`, a few gradient steps on the angles
//! against the quadratic coupling, and a dual ascent step on `u`.

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::Frame;
use super::prox::prox_linf;
use super::{
    backtrack, frame_with_perturbation, initial_samples, masked_gradient, pick_best, validate_common, ChiMode,
    OptimizerConfig, OptimizerRun, RestartSummary,
};
use crate::error::{Error, Result};
use crate::modes::{ModeKind, ModeTable};
use crate::sampling::{Provenance, SamplingSet};
use crate::scalar::Real;

/// Form of the multiplier update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualUpdate {
    /// `u ← u + τ(z − g)`.
    #[default]
    Standard,
    /// `u ← u + τ(u + z − g)`, with the previous multiplier inside the step.
    WithPrevious,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", deny_unknown_fields)]
pub struct AlmConfig<T: Real> {
    /// Penalty weight of the coupling term.
    pub tau: T,
    /// Weight of `‖z‖∞`.
    pub lambda_reg: T,
    /// Largest angle step of the inner gradient iterations.
    pub eta_inner: T,
    /// Step of the proximal-gradient `z` update.
    pub eta_z: T,
    pub iterations: usize,
    pub inner_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    pub kind: ModeKind,
    pub degree: u32,
    pub samples: usize,
    pub chi_mode: ChiMode<T>,
    #[serde(default)]
    pub dual_update: DualUpdate,
}

impl<T: Real> AlmConfig<T> {
    /// Defaults with `lambda_reg = J / 250` for the `J` column pairs of the
    /// configured basis; the clipping mass of the `z` step has to grow with
    /// the number of pairs it is spread over.
    pub fn new(kind: ModeKind, degree: u32, samples: usize) -> Self {
        let l = crate::modes::mode_count(kind, degree).unwrap_or(2);
        let pairs = (l * l.saturating_sub(1) / 2).max(1);
        Self {
            tau: T::one(),
            lambda_reg: T::from_usize(pairs).unwrap() / T::lit(250.0),
            eta_inner: T::lit(8.0),
            eta_z: T::one(),
            iterations: 150,
            inner_iters: 5,
            restarts: 5,
            seed: 0,
            kind,
            degree,
            samples,
            chi_mode: ChiMode::default_for(kind),
            dual_update: DualUpdate::Standard,
        }
    }

    fn validate(&self) -> Result<ModeTable> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.tau) || !positive(self.lambda_reg) || !positive(self.eta_z) {
            return Err(Error::invalid("tau, lambda_reg and eta_z must be positive"));
        }
        if !(self.eta_inner >= T::zero()) || !self.eta_inner.is_finite() {
            return Err(Error::invalid("eta_inner must be finite and non-negative"));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be at least 1"));
        }
        validate_common(self.kind, self.degree, self.samples, self.restarts, &self.chi_mode)
    }
}

/// Primal, auxiliary and scaled dual variables of one ALM run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AlmState<T: Real> {
    /// One entry per column pair, ordered by `q` then `r < q`.
    pub z: Vec<Complex<T>>,
    pub u: Vec<Complex<T>>,
    pub angles: SamplingSet<T>,
}

/// Strict upper triangle of the Gram matrix in pair order.
fn pairs<T: Real>(gram: &Array2<Complex<T>>) -> Vec<Complex<T>> {
    let l = gram.ncols();
    let mut g = Vec::with_capacity(l * (l - 1) / 2);
    for q in 1..l {
        for r in 0..q {
            g.push(gram[[r, q]]);
        }
    }
    g
}

/// `τ/2 ‖z − g + u‖²`.
fn coupling<T: Real>(z: &[Complex<T>], u: &[Complex<T>], gram: &Array2<Complex<T>>, tau: T) -> T {
    let g = pairs(gram);
    let s: T = z.iter().zip(u).zip(&g).map(|((zv, uv), gv)| (*zv - *gv + *uv).norm_sqr()).sum();
    tau * s / T::lit(2.0)
}

/// Weight matrix of the coupling: `M_rq = −τ (z + u − g)_j`.
fn coupling_weights<T: Real>(z: &[Complex<T>], u: &[Complex<T>], gram: &Array2<Complex<T>>, tau: T) -> Array2<Complex<T>> {
    let l = gram.ncols();
    let mut m = Array2::from_elem((l, l), Complex::new(T::zero(), T::zero()));
    let mut j = 0;
    for q in 1..l {
        for r in 0..q {
            let w = (z[j] + u[j] - gram[[r, q]]) * (-tau);
            m[[r, q]] = w;
            m[[q, r]] = w.conj();
            j += 1;
        }
    }
    m
}

fn l1_gap<T: Real>(z: &[Complex<T>], gram: &Array2<Complex<T>>) -> T {
    z.iter().zip(pairs(gram)).map(|(a, b)| (*a - b).norm()).sum()
}

/// Best of `config.restarts` independent runs from uniform-random starts.
pub fn alm_optimize<T: Real>(config: &AlmConfig<T>) -> Result<OptimizerRun<T>> {
    let table = config.validate()?;
    let runs = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let init = initial_samples(config.samples, &config.chi_mode, config.seed, r)?;
            run(config, &table, init, r).map(|(s, _)| s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pick_best(OptimizerConfig::Alm(*config), runs))
}

/// One ALM run from `init`, returning the summary and the final state.
pub fn alm_restart<T: Real>(
    config: &AlmConfig<T>,
    init: SamplingSet<T>,
    restart: usize,
) -> Result<(RestartSummary<T>, AlmState<T>)> {
    let table = config.validate()?;
    if init.len() != config.samples {
        return Err(Error::dims(format!("init has {} samples, config expects {}", init.len(), config.samples)));
    }
    run(config, &table, init, restart)
}

fn run<T: Real>(
    config: &AlmConfig<T>,
    table: &ModeTable,
    init: SamplingSet<T>,
    restart: usize,
) -> Result<(RestartSummary<T>, AlmState<T>)> {
    let (mut samples, mut frame) = frame_with_perturbation(table, init, &config.chi_mode, config.seed, restart)?;
    let provenance = Provenance::OptimizedAlm;
    let tau = config.tau;
    let zero = Complex::new(T::zero(), T::zero());
    let mut z = pairs(&frame.gram);
    let mut u = vec![zero; z.len()];
    let init_mu = frame.mu;
    let mut best_mu = init_mu;
    let mut best = samples.clone();
    let mut trace = vec![init_mu];
    let mut residuals = Vec::with_capacity(config.iterations);
    let mut last_step = config.eta_inner;
    for _ in 0..config.iterations {
        // proximal-gradient step on z
        let g = pairs(&frame.gram);
        let ez = config.eta_z * tau;
        let z_hat: Vec<_> = (0..z.len()).map(|j| z[j] - (z[j] - g[j] + u[j]) * ez).collect();
        z = prox_linf(&z_hat, config.lambda_reg * config.eta_z)?;

        // gradient steps on the coupling over the angles
        let mut f = coupling(&z, &u, &frame.gram, tau);
        for _ in 0..config.inner_iters {
            let weights = coupling_weights(&z, &u, &frame.gram, tau);
            let grad = masked_gradient(table, &samples, &frame, &weights, &config.chi_mode);
            let accepted = backtrack(
                table,
                &samples,
                &grad,
                f,
                config.eta_inner,
                last_step,
                &config.chi_mode,
                provenance,
                |fr: &Frame<T>| coupling(&z, &u, &fr.gram, tau),
            );
            let Some((s, fr, v, step)) = accepted else { break };
            samples = s;
            frame = fr;
            f = v;
            last_step = step;
        }

        // dual ascent
        let g = pairs(&frame.gram);
        for j in 0..u.len() {
            let r = z[j] - g[j];
            u[j] = match config.dual_update {
                DualUpdate::Standard => u[j] + r * tau,
                DualUpdate::WithPrevious => u[j] + (r + u[j]) * tau,
            };
        }

        residuals.push(l1_gap(&z, &frame.gram));
        if frame.mu < best_mu {
            best_mu = frame.mu;
            best = samples.clone();
        }
        trace.push(best_mu);
    }
    let summary = RestartSummary {
        restart,
        init_mu,
        best_mu,
        rho_trace: trace,
        residual_trace: residuals,
        iterations_used: config.iterations,
        best_angles: Some(best.with_provenance(provenance)),
    };
    Ok((summary, AlmState { z, u, angles: samples }))
}
