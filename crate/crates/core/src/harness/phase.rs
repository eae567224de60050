use std::path::Path;

use ndarray::ArrayView1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::farfield::{SmcModel, SyntheticSmc};
use super::{sampler_set, OptimizerBudget, Sampler};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_table};
use crate::modes::{mode_count, ModeKind};
use crate::recovery::{support_recovery_success, BpOptions, BpSolver};
use crate::rng;
use crate::sensing::build_matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGridConfig {
    pub kind: ModeKind,
    pub degree: u32,
    /// Columns of the grid, each in `(0, 1]`.
    pub k_over_l: Vec<f64>,
    /// Rows of the grid, strictly increasing, each in `(0, 1]`.
    pub s_over_k: Vec<f64>,
    pub trials: usize,
    pub sampler: Sampler,
    pub seed: u64,
    /// Relative ℓ2 error below which a trial counts as recovered.
    pub rel_tol: f64,
    #[serde(default)]
    pub bp: BpOptions<f64>,
    #[serde(default)]
    pub budget: OptimizerBudget,
}

impl PhaseGridConfig {
    /// 8×8 grid with 50 trials per cell.
    pub fn desk(kind: ModeKind, degree: u32, sampler: Sampler) -> Self {
        Self {
            kind,
            degree,
            k_over_l: (2..=9).map(|i| i as f64 / 10.0).collect(),
            s_over_k: (0..8).map(|i| 0.05 + 0.1 * i as f64).collect(),
            trials: 50,
            sampler,
            seed: 0,
            rel_tol: 1e-4,
            bp: BpOptions::default(),
            budget: OptimizerBudget::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        let in_unit = |v: &f64| *v > 0.0 && *v <= 1.0;
        if self.k_over_l.is_empty() || self.s_over_k.is_empty() {
            return Err(Error::invalid("the phase grid is empty"));
        }
        if !self.k_over_l.iter().all(in_unit) || !self.s_over_k.iter().all(in_unit) {
            return Err(Error::invalid("grid ratios must lie in (0, 1]"));
        }
        if self.s_over_k.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("s/K values must be strictly increasing"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::invalid("rel_tol must be positive"));
        }
        Ok(())
    }

    fn paired(&self) -> bool {
        self.kind == ModeKind::SnfMuPm1
    }

    /// Sample count of a column; even for the paired probe basis.
    pub fn k_for(&self, l: usize, k_over_l: f64) -> usize {
        if self.paired() {
            (2 * (k_over_l * l as f64 / 2.0).round() as usize).max(2)
        } else {
            ((k_over_l * l as f64).round() as usize).max(1)
        }
    }

    pub fn s_for(k: usize, s_over_k: f64) -> usize {
        ((s_over_k * k as f64).round() as usize).max(1)
    }
}

/// Where the 50% success level is crossed within a column.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contour {
    /// Already below 50% at the smallest s/K.
    Below,
    /// Interpolated s/K of the crossing.
    At(f64),
    /// At least 50% up to the largest s/K.
    Above,
}

impl Contour {
    /// Comparable level: `Below` is `-inf`, `Above` is `+inf`.
    pub fn level(&self) -> f64 {
        match self {
            Contour::Below => f64::NEG_INFINITY,
            Contour::At(x) => *x,
            Contour::Above => f64::INFINITY,
        }
    }

    /// First downward crossing of 0.5 along `rates`, interpolated linearly in `s_over_k`.
    pub fn from_rates(s_over_k: &[f64], rates: &[f64]) -> Self {
        if rates.first().is_none_or(|r| *r < 0.5) {
            return Contour::Below;
        }
        match rates.iter().position(|r| *r < 0.5) {
            None => Contour::Above,
            Some(j) => {
                let (r0, r1) = (rates[j - 1], rates[j]);
                let t = (r0 - 0.5) / (r0 - r1);
                Contour::At(s_over_k[j - 1] + t * (s_over_k[j] - s_over_k[j - 1]))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGridResult {
    pub config: PhaseGridConfig,
    pub mode_count: usize,
    /// `K` of each column.
    pub k_values: Vec<usize>,
    /// `s` of each cell, indexed `[column][row]`.
    pub s_values: Vec<Vec<usize>>,
    pub successes: Vec<Vec<usize>>,
    pub success_rate: Vec<Vec<f64>>,
    pub contour50: Vec<Contour>,
    /// Trials whose solver hit the iteration limit.
    pub unconverged: usize,
}

/// Success rate of basis pursuit over a `(K/L, s/K)` grid.
///
/// Random sampling redraws the points for every trial; the other samplers
/// build one set per column and share its solver across all trials.
pub fn phase_transition(config: &PhaseGridConfig) -> Result<PhaseGridResult> {
    config.validate()?;
    let l = mode_count(config.kind, config.degree)?;
    let mut k_values = Vec::new();
    let mut s_values = Vec::new();
    let mut successes = Vec::new();
    let mut unconverged = 0;
    for (col, &kl) in config.k_over_l.iter().enumerate() {
        let k = config.k_for(l, kl);
        let col_seed = rng::derive_seed(config.seed, &[rng::tag::SAMPLES, col as u64]);
        let shared = if config.sampler == Sampler::Random {
            None
        } else {
            let s = sampler_set(config.sampler, config.kind, config.degree, k, col_seed, &config.budget)?;
            Some(BpSolver::new(build_matrix(config.kind, config.degree, &s)?.view())?)
        };
        let rows: Vec<usize> = config.s_over_k.iter().map(|&r| PhaseGridConfig::s_for(k, r).min(l)).collect();
        let jobs: Vec<(usize, usize)> =
            (0..rows.len()).flat_map(|row| (0..config.trials).map(move |t| (row, t))).collect();
        let outcomes = jobs
            .par_iter()
            .map(|&(row, trial)| {
                let path = [col as u64, row as u64, trial as u64];
                let own;
                let solver = match &shared {
                    Some(s) => s,
                    None => {
                        let seed = rng::derive_seed(col_seed, &path);
                        let s = sampler_set(Sampler::Random, config.kind, config.degree, k, seed, &config.budget)?;
                        own = BpSolver::new(build_matrix(config.kind, config.degree, &s)?.view())?;
                        &own
                    }
                };
                let mut r = rng::stream(config.seed, &[rng::tag::SMC, path[0], path[1], path[2]]);
                let x = SyntheticSmc::generate_with(l, rows[row], SmcModel::ExactSparse, &mut r)?;
                let y = solver.matrix().dot(&ArrayView1::from(&x.coeffs));
                let res = solver.solve(&y.to_vec(), &config.bp)?;
                let ok = support_recovery_success(&res.x_hat.to_vec(), &x.coeffs, config.rel_tol)?;
                Ok((row, ok, res.converged))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut counts = vec![0usize; rows.len()];
        for (row, ok, converged) in outcomes {
            counts[row] += ok as usize;
            unconverged += (!converged) as usize;
        }
        k_values.push(k);
        s_values.push(rows);
        successes.push(counts);
    }
    let trials = config.trials as f64;
    let success_rate: Vec<Vec<f64>> =
        successes.iter().map(|c| c.iter().map(|&n| n as f64 / trials).collect()).collect();
    let contour50 = success_rate.iter().map(|r| Contour::from_rates(&config.s_over_k, r)).collect();
    Ok(PhaseGridResult {
        config: config.clone(),
        mode_count: l,
        k_values,
        s_values,
        successes,
        success_rate,
        contour50,
        unconverged,
    })
}

/// One row per cell.
pub fn write_phase_csv(path: &Path, result: &PhaseGridResult) -> Result<()> {
    let mut rows = Vec::new();
    for (c, kl) in result.config.k_over_l.iter().enumerate() {
        for (r, sk) in result.config.s_over_k.iter().enumerate() {
            rows.push(vec![
                fmt_f64(*kl),
                fmt_f64(*sk),
                result.k_values[c].to_string(),
                result.s_values[c][r].to_string(),
                result.successes[c][r].to_string(),
                result.config.trials.to_string(),
                fmt_f64(result.success_rate[c][r]),
            ]);
        }
    }
    write_table(path, &["k_over_l", "s_over_k", "k", "s", "successes", "trials", "success_rate"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contour_interpolates() {
        let s = [0.1, 0.2, 0.3];
        assert_eq!(Contour::from_rates(&s, &[1.0, 1.0, 0.6]), Contour::Above);
        assert_eq!(Contour::from_rates(&s, &[0.2, 0.1, 0.0]), Contour::Below);
        match Contour::from_rates(&s, &[1.0, 0.75, 0.25]) {
            Contour::At(x) => assert!((x - 0.25).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(Contour::Below.level() < Contour::At(0.0).level());
    }

    #[test]
    fn tiny_grid_counts() {
        let mut c = PhaseGridConfig::desk(ModeKind::SphericalHarmonics, 3, Sampler::Random);
        c.k_over_l = vec![0.5, 0.9];
        c.s_over_k = vec![0.1, 1.0];
        c.trials = 2;
        let r = phase_transition(&c).unwrap();
        assert_eq!(r.k_values, vec![8, 14]);
        for rates in &r.success_rate {
            for v in rates {
                assert!([0.0, 0.5, 1.0].contains(v));
            }
        }
        assert_eq!(phase_transition(&c).unwrap(), r);
    }

    #[test]
    fn rejects_bad_grids() {
        let mut c = PhaseGridConfig::desk(ModeKind::SphericalHarmonics, 3, Sampler::Spiral);
        c.s_over_k = vec![0.3, 0.2];
        assert!(phase_transition(&c).is_err());
        c.s_over_k = vec![];
        assert!(phase_transition(&c).is_err());
        c.s_over_k = vec![0.2];
        c.k_over_l = vec![1.5];
        assert!(phase_transition(&c).is_err());
    }

    #[test]
    fn paired_columns_are_even() {
        let c = PhaseGridConfig::desk(ModeKind::SnfMuPm1, 5, Sampler::Spiral);
        for kl in &c.k_over_l {
            assert_eq!(c.k_for(70, *kl) % 2, 0);
        }
    }
}
