use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use snfcs::harness::{SmcModel, SyntheticSmc};
use snfcs::recovery::support_recovery_success;
use snfcs::sensing::build_matrix;
use snfcs::{io, BpSolver, ModeKind, SensingMatrix, C64};

use super::BpSection;
use crate::config::{self, config_err};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecoverConfig {
    /// Matrix JSON as written by `coherence --export-matrix`.
    pub matrix: Option<PathBuf>,
    /// Alternatively, build the matrix from a basis and a sampling CSV.
    pub kind: Option<ModeKind>,
    pub degree: Option<u32>,
    pub samples: Option<PathBuf>,
    /// Measurement vector (`re,im` CSV).
    pub y: Option<PathBuf>,
    /// Known coefficients to score the recovery against.
    pub truth: Option<PathBuf>,
    /// Without `y`, draw a synthetic truth with this many nonzeros.
    pub sparsity: Option<usize>,
    pub smc_model: SmcModel,
    pub seed: u64,
    pub rel_tol: f64,
    pub out_dir: PathBuf,
    pub bp: BpSection,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        Self {
            matrix: None,
            kind: None,
            degree: None,
            samples: None,
            y: None,
            truth: None,
            sparsity: None,
            smc_model: SmcModel::ExactSparse,
            seed: 0,
            rel_tol: 1e-4,
            out_dir: config::default_out_dir(),
            bp: BpSection::default(),
        }
    }
}

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    /// TOML configuration file.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    kind: Option<ModeKind>,
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long)]
    samples: Option<PathBuf>,
    #[arg(long)]
    y: Option<PathBuf>,
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    sparsity: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    max_iters: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RecoverySummary {
    pub rows: usize,
    pub cols: usize,
    pub residual_norm: f64,
    pub l1_value: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success: Option<bool>,
}

fn matrix(c: &RecoverConfig) -> Result<SensingMatrix> {
    match (&c.matrix, &c.samples) {
        (Some(_), Some(_)) => Err(config_err("give either `matrix` or `samples`, not both")),
        (Some(p), None) => io::read_matrix_json(p).with_context(|| format!("reading {}", p.display())),
        (None, Some(p)) => {
            let (kind, degree) = c.kind.zip(c.degree).ok_or_else(|| config_err("`samples` needs `kind` and `degree`"))?;
            let s = io::read_samples(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(build_matrix(kind, degree, &s)?)
        }
        (None, None) => Err(config_err("give `matrix` or `samples`")),
    }
}

fn read_vec(p: &PathBuf) -> Result<Vec<C64>> {
    io::read_vector_csv(p).with_context(|| format!("reading {}", p.display()))
}

pub fn run(args: Args, out_dir: Option<PathBuf>) -> Result<()> {
    let mut o = super::overrides(&args, out_dir)?;
    o.set_in("bp", "max_iters", args.max_iters.map(|v| v as i64));
    let c: RecoverConfig = config::resolve(args.config.as_deref(), o)?;
    if !(c.rel_tol > 0.0) {
        return Err(config_err("rel_tol must be positive"));
    }
    config::echo(&c.out_dir, "recover", &c)?;
    let a = matrix(&c)?;

    let mut truth = c.truth.as_ref().map(read_vec).transpose()?;
    let y = match (&c.y, c.sparsity) {
        (Some(p), None) => read_vec(p)?,
        (None, Some(s)) => {
            if truth.is_some() {
                return Err(config_err("`truth` and `sparsity` exclude each other"));
            }
            let smc = SyntheticSmc::generate(a.cols(), s, c.smc_model, c.seed)?;
            let y: Vec<C64> =
                a.data().rows().into_iter().map(|r| r.iter().zip(&smc.coeffs).map(|(u, v)| u * v).sum()).collect();
            io::write_vector_csv(&c.out_dir.join("truth.csv"), &smc.coeffs)?;
            io::write_vector_csv(&c.out_dir.join("y.csv"), &y)?;
            truth = Some(smc.coeffs);
            y
        }
        _ => return Err(config_err("give exactly one of `y` and `sparsity`")),
    };

    let res = BpSolver::new(a.view())?.solve(&y, &c.bp.options())?;
    let x_hat = res.x_hat.to_vec();
    let (relative_error, success) = match &truth {
        Some(t) => {
            if t.len() != x_hat.len() {
                return Err(config_err(format!("truth has {} entries, the matrix {} columns", t.len(), x_hat.len())));
            }
            let err: f64 = x_hat.iter().zip(t).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt();
            let norm: f64 = t.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            (Some(err / norm), Some(support_recovery_success(&x_hat, t, c.rel_tol)?))
        }
        None => (None, None),
    };
    io::write_vector_csv(&c.out_dir.join("x_hat.csv"), &x_hat)?;
    let summary = RecoverySummary {
        rows: a.rows(),
        cols: a.cols(),
        residual_norm: res.residual_norm,
        l1_value: res.l1_value,
        iterations: res.iterations,
        converged: res.converged,
        relative_error,
        success,
    };
    io::write_json(&c.out_dir.join("recovery.json"), &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
