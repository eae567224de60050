//! Gradient descent on the ℓp-smoothed coherence.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::{lp_value, lp_weights};
use super::{
    backtrack, frame_with_perturbation, initial_samples, masked_gradient, pick_best, validate_common, ChiMode,
    OptimizerConfig, OptimizerRun, RestartSummary,
};
use crate::error::{Error, Result};
use crate::modes::{ModeKind, ModeTable};
use crate::sampling::{Provenance, SamplingSet};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", deny_unknown_fields)]
pub struct GdConfig<T: Real> {
    /// Smoothing exponent, `p >= 2`.
    pub p: T,
    /// Largest step size; each step backtracks from `min(eta, 2·previous)`.
    pub eta: T,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub kind: ModeKind,
    pub degree: u32,
    pub samples: usize,
    pub chi_mode: ChiMode<T>,
}

impl<T: Real> GdConfig<T> {
    pub fn new(kind: ModeKind, degree: u32, samples: usize) -> Self {
        Self {
            p: T::lit(6.0),
            eta: T::lit(8.0),
            iterations: 300,
            restarts: 5,
            seed: 0,
            kind,
            degree,
            samples,
            chi_mode: ChiMode::default_for(kind),
        }
    }

    fn validate(&self) -> Result<ModeTable> {
        if !(self.p >= T::lit(2.0)) || !self.p.is_finite() {
            return Err(Error::invalid(format!("p must be finite and >= 2, got {}", self.p)));
        }
        if !(self.eta >= T::zero()) || !self.eta.is_finite() {
            return Err(Error::invalid(format!("eta must be finite and non-negative, got {}", self.eta)));
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be at least 1"));
        }
        validate_common(self.kind, self.degree, self.samples, self.restarts, &self.chi_mode)
    }
}

/// Best of `config.restarts` independent runs from uniform-random starts.
pub fn gd_optimize<T: Real>(config: &GdConfig<T>) -> Result<OptimizerRun<T>> {
    let table = config.validate()?;
    let runs = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let init = initial_samples(config.samples, &config.chi_mode, config.seed, r)?;
            run(config, &table, init, r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pick_best(OptimizerConfig::Gd(*config), runs))
}

/// One descent run from `init`; `restart` only labels the summary and seeds
/// the perturbation stream.
pub fn gd_restart<T: Real>(config: &GdConfig<T>, init: SamplingSet<T>, restart: usize) -> Result<RestartSummary<T>> {
    let table = config.validate()?;
    if init.len() != config.samples {
        return Err(Error::dims(format!("init has {} samples, config expects {}", init.len(), config.samples)));
    }
    run(config, &table, init, restart)
}

fn run<T: Real>(config: &GdConfig<T>, table: &ModeTable, init: SamplingSet<T>, restart: usize) -> Result<RestartSummary<T>> {
    let (mut samples, mut frame) = frame_with_perturbation(table, init, &config.chi_mode, config.seed, restart)?;
    let provenance = Provenance::OptimizedGd;
    let p = config.p;
    let init_mu = frame.mu;
    let mut best_mu = init_mu;
    let mut best = samples.clone();
    let mut trace = vec![init_mu];
    let mut value = lp_value(&frame.gram, p);
    let mut last_step = config.eta;
    let mut used = 0;
    for _ in 0..config.iterations {
        used += 1;
        let (_, weights) = lp_weights(&frame.gram, p);
        let grad = masked_gradient(table, &samples, &frame, &weights, &config.chi_mode);
        let accepted = backtrack(table, &samples, &grad, value, config.eta, last_step, &config.chi_mode, provenance, |f| {
            lp_value(&f.gram, p)
        });
        let Some((s, f, v, step)) = accepted else {
            trace.push(best_mu);
            break;
        };
        samples = s;
        frame = f;
        value = v;
        last_step = step;
        if frame.mu < best_mu {
            best_mu = frame.mu;
            best = samples.clone();
        }
        trace.push(best_mu);
    }
    Ok(RestartSummary {
        restart,
        init_mu,
        best_mu,
        rho_trace: trace,
        residual_trace: Vec::new(),
        iterations_used: used,
        best_angles: Some(best.with_provenance(provenance)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensing::build_matrix;

    #[test]
    fn trace_is_monotone_and_matches_angles() {
        let mut c = GdConfig::<f64>::new(ModeKind::SphericalHarmonics, 3, 12);
        c.iterations = 30;
        c.restarts = 2;
        let run = gd_optimize(&c).unwrap();
        assert!(run.rho_trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*run.rho_trace.last().unwrap(), run.best_mu);
        let mu = build_matrix(c.kind, c.degree, &run.best_angles).unwrap().coherence().unwrap().mu;
        assert!((mu - run.best_mu).abs() < 1e-12);
        assert!(run.best_mu < run.rho_trace[0]);
    }

    #[test]
    fn zero_step_keeps_init() {
        let mut c = GdConfig::<f64>::new(ModeKind::SphericalHarmonics, 2, 8);
        c.iterations = 1;
        c.eta = 0.0;
        c.restarts = 1;
        let init = initial_samples(8, &c.chi_mode, c.seed, 0).unwrap();
        let s = gd_restart(&c, init.clone(), 0).unwrap();
        assert_eq!(s.best_mu, s.init_mu);
        let best = s.best_angles.unwrap();
        assert_eq!(best.theta(), init.theta());
        assert_eq!(best.phi(), init.phi());
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = GdConfig::<f64>::new(ModeKind::SnfMuPm1, 2, 9);
        assert!(gd_optimize(&c).is_err());
        c.samples = 10;
        c.p = 1.0;
        assert!(gd_optimize(&c).is_err());
    }
}
