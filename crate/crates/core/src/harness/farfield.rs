//! Synthetic far-field reconstruction: sparse mode coefficients are pushed
//! through the sensing matrix, recovered by basis pursuit, and compared as
//! normalized pattern cuts.
//!
//! The cut is the angular expansion `Σ c_q basis_q(theta, phi_cut, 0)`
//! evaluated directly. Per-mode far-field constants are left out: both the
//! reference and the reconstruction are evaluated the same way, so any fixed
//! per-mode factor would only reshape both patterns identically.

use std::path::Path;

use ndarray::{Array1, ArrayView1};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{sampler_set, OptimizerBudget, Sampler};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, write_table};
use crate::modes::{mode_count, mode_table, ModeKind};
use crate::recovery::{BpOptions, BpSolver};
use crate::rng;
use crate::sampling::{apply_chi, equiangular, ChiPolicy, SamplingSet};
use crate::sensing::{basis_value, build_matrix};
use crate::C64;

/// Floor of the error metric relative to the truth peak.
pub const ERROR_FLOOR_DB: f64 = -60.0;
/// Magnitudes below this ratio of the peak are reported at `20·log10` of it.
const MIN_RATIO: f64 = 1e-15;

/// Distribution of the synthetic coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SmcModel {
    /// `s` complex Gaussian nonzeros (unit variance) on a uniform random support.
    ExactSparse,
    /// Magnitudes `j^(-decay_rate)` over a random permutation, random phases.
    Compressible { decay_rate: f64 },
}

impl Default for SmcModel {
    fn default() -> Self {
        SmcModel::ExactSparse
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSmc {
    pub coeffs: Vec<C64>,
    /// Nonzero count for the sparse model; the full length for the compressible one.
    pub sparsity: usize,
    pub seed: u64,
    pub model: SmcModel,
}

impl SyntheticSmc {
    pub fn generate(l: usize, s: usize, model: SmcModel, seed: u64) -> Result<Self> {
        let mut r = rng::stream(seed, &[rng::tag::SMC]);
        let mut out = Self::generate_with(l, s, model, &mut r)?;
        out.seed = seed;
        Ok(out)
    }

    pub(crate) fn generate_with<R: Rng + ?Sized>(l: usize, s: usize, model: SmcModel, r: &mut R) -> Result<Self> {
        let zero = C64::new(0.0, 0.0);
        match model {
            SmcModel::ExactSparse => {
                if s > l {
                    return Err(Error::invalid(format!("sparsity {s} exceeds length {l}")));
                }
                let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
                let mut coeffs = vec![zero; l];
                for i in rand::seq::index::sample(r, l, s) {
                    coeffs[i] = C64::new(normal.sample(r), normal.sample(r));
                }
                Ok(Self { coeffs, sparsity: s, seed: 0, model })
            }
            SmcModel::Compressible { decay_rate } => {
                if !(decay_rate > 0.0) {
                    return Err(Error::invalid("decay rate must be positive"));
                }
                let mut order: Vec<usize> = (0..l).collect();
                order.shuffle(r);
                let mut coeffs = vec![zero; l];
                for (j, &i) in order.iter().enumerate() {
                    let phase: f64 = r.random::<f64>() * std::f64::consts::TAU;
                    coeffs[i] = C64::from_polar(((j + 1) as f64).powf(-decay_rate), phase);
                }
                Ok(Self { coeffs, sparsity: l, seed: 0, model })
            }
        }
    }
}

/// Noise-free measurements `y = A c` at `samples`.
pub fn synth_forward(kind: ModeKind, degree: u32, samples: &SamplingSet<f64>, smc: &SyntheticSmc) -> Result<Vec<C64>> {
    let a = build_matrix(kind, degree, samples)?;
    if smc.coeffs.len() != a.cols() {
        return Err(Error::dims(format!("{} coefficients for {} modes", smc.coeffs.len(), a.cols())));
    }
    Ok(a.data().dot(&ArrayView1::from(&smc.coeffs)).to_vec())
}

/// Peak-normalized magnitude of a field along `phi = phi_cut`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternCut {
    pub phi_cut: f64,
    pub theta_grid: Vec<f64>,
    pub magnitude_db: Vec<f64>,
}

pub fn farfield_cut(coeffs: &[C64], kind: ModeKind, degree: u32, phi_cut: f64, theta_grid: &[f64]) -> Result<PatternCut> {
    if theta_grid.is_empty() {
        return Err(Error::invalid("empty theta grid"));
    }
    let table = mode_table(kind, degree)?;
    if coeffs.len() != table.len() {
        return Err(Error::dims(format!("{} coefficients for {} modes", coeffs.len(), table.len())));
    }
    let field: Vec<f64> = theta_grid
        .iter()
        .map(|&t| {
            table
                .modes()
                .iter()
                .zip(coeffs)
                .map(|(m, c)| *c * basis_value(*m, t, phi_cut, 0.0))
                .sum::<C64>()
                .norm()
        })
        .collect();
    let peak = field.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::domain("the field vanishes on the whole cut"));
    }
    let magnitude_db = field.iter().map(|f| 20.0 * (f / peak).max(MIN_RATIO).log10()).collect();
    Ok(PatternCut { phi_cut, theta_grid: theta_grid.to_vec(), magnitude_db })
}

/// `(max, mean)` of `|recon − truth|` in dB over points where the truth is
/// above [`ERROR_FLOOR_DB`].
pub fn farfield_error(recon: &PatternCut, truth: &PatternCut) -> Result<(f64, f64)> {
    let same_grid = recon.theta_grid.len() == truth.theta_grid.len()
        && recon.phi_cut == truth.phi_cut
        && recon.theta_grid.iter().zip(&truth.theta_grid).all(|(a, b)| a == b);
    if !same_grid || recon.magnitude_db.len() != truth.magnitude_db.len() {
        return Err(Error::dims("pattern cuts are on different grids"));
    }
    let diffs: Vec<f64> = recon
        .magnitude_db
        .iter()
        .zip(&truth.magnitude_db)
        .filter(|(_, t)| **t >= ERROR_FLOOR_DB)
        .map(|(r, t)| (r - t).abs())
        .collect();
    let max = diffs.iter().copied().fold(0.0, f64::max);
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    Ok((max, mean))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarfieldConfig {
    pub kind: ModeKind,
    pub degree: u32,
    pub k_values: Vec<usize>,
    pub sampler: Sampler,
    #[serde(default)]
    pub smc_model: SmcModel,
    /// Nonzeros of the sparse model.
    pub sparsity: usize,
    pub seed: u64,
    /// Independent ground-truth draws averaged per `K`.
    pub trials: usize,
    pub phi_cut: f64,
    pub theta_step_deg: f64,
    /// Grid step of the equiangular reference acquisition.
    pub reference_step_deg: u32,
    #[serde(default)]
    pub bp: BpOptions<f64>,
    #[serde(default)]
    pub budget: OptimizerBudget,
}

impl FarfieldConfig {
    pub fn new(degree: u32, k_values: Vec<usize>, sampler: Sampler) -> Self {
        Self {
            kind: ModeKind::SnfMuPm1,
            degree,
            k_values,
            sampler,
            smc_model: SmcModel::ExactSparse,
            sparsity: 20,
            seed: 0,
            trials: 5,
            phi_cut: 0.0,
            theta_step_deg: 1.0,
            reference_step_deg: 10,
            bp: BpOptions::default(),
            budget: OptimizerBudget::default(),
        }
    }

    pub fn theta_grid(&self) -> Vec<f64> {
        let n = (180.0 / self.theta_step_deg).round() as usize;
        (0..=n).map(|i| (i as f64 * self.theta_step_deg).min(180.0).to_radians()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarfieldRow {
    pub label: String,
    pub k: usize,
    /// Trial averages.
    pub max_db: f64,
    pub mean_db: f64,
    pub trial_max_db: Vec<f64>,
    pub trial_mean_db: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarfieldReport {
    pub config: FarfieldConfig,
    pub mode_count: usize,
    pub rows: Vec<FarfieldRow>,
    /// Equiangular acquisition with at least as many samples as modes.
    pub reference: FarfieldRow,
    /// Truth cut of the first trial.
    pub truth_cut: PatternCut,
    /// Reconstructed cut of the first trial for each `K`.
    pub cuts: Vec<(usize, PatternCut)>,
}

fn reference_samples(kind: ModeKind, step: u32) -> Result<SamplingSet<f64>> {
    let grid = equiangular(step)?;
    match kind {
        ModeKind::SnfMuPm1 => apply_chi(&grid.duplicate_pairs(), ChiPolicy::AlternatePair),
        ModeKind::WignerGeneral => apply_chi(&grid, ChiPolicy::EvenSpread),
        ModeKind::SphericalHarmonics => Ok(grid),
    }
}

/// Ground truth → measurements → basis pursuit → cut → error, per `K`.
pub fn farfield_demo(config: &FarfieldConfig) -> Result<FarfieldReport> {
    if config.k_values.is_empty() || config.trials == 0 {
        return Err(Error::invalid("farfield needs at least one K and one trial"));
    }
    if !(config.theta_step_deg > 0.0) {
        return Err(Error::invalid("theta step must be positive"));
    }
    let l = mode_count(config.kind, config.degree)?;
    let grid = config.theta_grid();
    let truths: Vec<SyntheticSmc> = (0..config.trials)
        .map(|t| {
            let seed = rng::derive_seed(config.seed, &[rng::tag::SMC, t as u64]);
            SyntheticSmc::generate(l, config.sparsity, config.smc_model, seed)
        })
        .collect::<Result<_>>()?;
    let truth_cuts: Vec<PatternCut> = truths
        .iter()
        .map(|t| farfield_cut(&t.coeffs, config.kind, config.degree, config.phi_cut, &grid))
        .collect::<Result<_>>()?;

    let evaluate = |label: String, samples: &SamplingSet<f64>| -> Result<(FarfieldRow, PatternCut)> {
        let a = build_matrix(config.kind, config.degree, samples)?;
        let solver = BpSolver::new(a.view())?;
        let mut first = None;
        let (mut maxes, mut means) = (Vec::new(), Vec::new());
        for (truth, truth_cut) in truths.iter().zip(&truth_cuts) {
            let y: Array1<C64> = a.data().dot(&ArrayView1::from(&truth.coeffs));
            let res = solver.solve(&y.to_vec(), &config.bp)?;
            let cut = farfield_cut(&res.x_hat.to_vec(), config.kind, config.degree, config.phi_cut, &grid)?;
            let (mx, mn) = farfield_error(&cut, truth_cut)?;
            maxes.push(mx);
            means.push(mn);
            first.get_or_insert(cut);
        }
        let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let row = FarfieldRow {
            label,
            k: samples.len(),
            max_db: avg(&maxes),
            mean_db: avg(&means),
            trial_max_db: maxes,
            trial_mean_db: means,
        };
        Ok((row, first.expect("at least one trial")))
    };

    let mut rows = Vec::new();
    let mut cuts = Vec::new();
    for &k in &config.k_values {
        let seed = rng::derive_seed(config.seed, &[rng::tag::SAMPLES, k as u64]);
        let samples = sampler_set(config.sampler, config.kind, config.degree, k, seed, &config.budget)?;
        let (row, cut) = evaluate(config.sampler.to_string(), &samples)?;
        rows.push(row);
        cuts.push((k, cut));
    }
    let reference_set = reference_samples(config.kind, config.reference_step_deg)?;
    let (reference, _) = evaluate(format!("equiangular_{}deg", config.reference_step_deg), &reference_set)?;
    Ok(FarfieldReport {
        config: config.clone(),
        mode_count: l,
        rows,
        reference,
        truth_cut: truth_cuts[0].clone(),
        cuts,
    })
}

/// Error table: one row per `K` plus the reference.
pub fn write_farfield_csv(path: &Path, report: &FarfieldReport) -> Result<()> {
    let rows = report.rows.iter().chain(std::iter::once(&report.reference)).map(|r| {
        vec![r.label.clone(), r.k.to_string(), fmt_f64(r.max_db), fmt_f64(r.mean_db)]
    });
    write_table(path, &["sampler", "k", "max_db", "mean_db"], rows)
}

/// Two-column `theta_deg,magnitude_db` file.
pub fn write_cut_csv(path: &Path, cut: &PatternCut) -> Result<()> {
    write_table(
        path,
        &["theta_deg", "magnitude_db"],
        cut.theta_grid.iter().zip(&cut.magnitude_db).map(|(t, m)| vec![fmt_f64(t.to_degrees()), fmt_f64(*m)]),
    )
}
