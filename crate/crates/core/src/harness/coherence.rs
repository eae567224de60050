use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sampler_set, OptimizerBudget, Sampler};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_table};
use crate::modes::{mode_count, ModeKind};
use crate::optim::{alm_optimize, gd_optimize};
use crate::rng;
use crate::sensing::{build_matrix, welch_bound};

/// Coherence statistics of one sampler at one `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRow {
    pub sampler: Sampler,
    pub k: usize,
    pub mean: f64,
    /// Sample standard deviation over draws (zero for a single draw).
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub welch: f64,
    pub draws: usize,
}

fn stats(sampler: Sampler, k: usize, welch: f64, mus: &[f64]) -> CoherenceRow {
    let n = mus.len() as f64;
    let mean = mus.iter().sum::<f64>() / n;
    let var = if mus.len() > 1 { mus.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    CoherenceRow {
        sampler,
        k,
        mean,
        std: var.sqrt(),
        min: mus.iter().copied().fold(f64::INFINITY, f64::min),
        max: mus.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        welch,
        draws: mus.len(),
    }
}

/// Coherence per sampler and `K`.
///
/// Fixed generators give one draw. Random sampling uses `restarts`
/// independent draws; the optimizers run with `restarts` restarts and the
/// statistics are over the best coherence of each restart.
pub fn coherence_benchmark(
    kind: ModeKind,
    degree: u32,
    k_values: &[usize],
    samplers: &[Sampler],
    restarts: usize,
    seed: u64,
    budget: &OptimizerBudget,
) -> Result<Vec<CoherenceRow>> {
    if k_values.is_empty() || samplers.is_empty() {
        return Err(Error::invalid("the benchmark needs at least one K and one sampler"));
    }
    if restarts == 0 {
        return Err(Error::invalid("restarts must be at least 1"));
    }
    let l = mode_count(kind, degree)?;
    let jobs: Vec<(Sampler, usize)> =
        samplers.iter().flat_map(|&s| k_values.iter().map(move |&k| (s, k))).collect();
    jobs.par_iter()
        .map(|&(sampler, k)| {
            let welch = welch_bound::<f64>(k, l)?;
            let cell_seed = rng::derive_seed(seed, &[k as u64]);
            let budget = OptimizerBudget { restarts: Some(restarts), ..*budget };
            let mus: Vec<f64> = match sampler {
                Sampler::Spiral | Sampler::Hammersley => {
                    let s = sampler_set(sampler, kind, degree, k, cell_seed, &budget)?;
                    vec![build_matrix(kind, degree, &s)?.coherence()?.mu]
                }
                Sampler::Random => (0..restarts)
                    .map(|d| {
                        let s = sampler_set(sampler, kind, degree, k, rng::derive_seed(cell_seed, &[d as u64]), &budget)?;
                        Ok(build_matrix(kind, degree, &s)?.coherence()?.mu)
                    })
                    .collect::<Result<_>>()?,
                Sampler::OptimizedGd => {
                    let run = gd_optimize(&budget.gd_config(kind, degree, k, cell_seed))?;
                    run.restarts.iter().map(|r| r.best_mu).collect()
                }
                Sampler::OptimizedAlm => {
                    let run = alm_optimize(&budget.alm_config(kind, degree, k, cell_seed))?;
                    run.restarts.iter().map(|r| r.best_mu).collect()
                }
            };
            Ok(stats(sampler, k, welch, &mus))
        })
        .collect()
}

/// One row per sampler and `K`.
pub fn write_coherence_csv(path: &Path, rows: &[CoherenceRow]) -> Result<()> {
    write_table(
        path,
        &["sampler", "k", "mean", "std", "min", "max", "welch", "draws"],
        rows.iter().map(|r| {
            vec![
                r.sampler.to_string(),
                r.k.to_string(),
                fmt_f64(r.mean),
                fmt_f64(r.std),
                fmt_f64(r.min),
                fmt_f64(r.max),
                fmt_f64(r.welch),
                r.draws.to_string(),
            ]
        }),
    )
}
