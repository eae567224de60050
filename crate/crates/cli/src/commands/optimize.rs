use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use snfcs::io::{self, fmt_f64};
use snfcs::optim::{alm_optimize, alm_restart, gd_optimize, gd_restart, DualUpdate, OptimizerConfig, RestartSummary};
use snfcs::{AlmConfig, ChiMode, GdConfig, ModeKind, OptimizerRun, SamplingSet};

use crate::config::{self, config_err, parse_field};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Gd,
    Alm,
}

/// Unset numeric fields keep the optimizer defaults.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeConfig {
    pub algorithm: Option<Algorithm>,
    pub kind: ModeKind,
    pub degree: Option<u32>,
    pub k: Option<usize>,
    pub seed: u64,
    pub restarts: Option<usize>,
    pub iterations: Option<usize>,
    /// `free`, or a chi policy to freeze polarization with.
    pub chi_mode: Option<String>,
    /// Start from this sampling CSV instead of random restarts.
    pub init: Option<PathBuf>,
    pub p: Option<f64>,
    pub eta: Option<f64>,
    pub tau: Option<f64>,
    pub lambda_reg: Option<f64>,
    pub eta_inner: Option<f64>,
    pub eta_z: Option<f64>,
    pub inner_iters: Option<usize>,
    pub dual_update: Option<DualUpdate>,
    pub out_dir: PathBuf,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            algorithm: None,
            kind: ModeKind::SphericalHarmonics,
            degree: None,
            k: None,
            seed: 0,
            restarts: None,
            iterations: None,
            chi_mode: None,
            init: None,
            p: None,
            eta: None,
            tau: None,
            lambda_reg: None,
            eta_inner: None,
            eta_z: None,
            inner_iters: None,
            dual_update: None,
            out_dir: config::default_out_dir(),
        }
    }
}

#[derive(clap::Args, Debug, Serialize)]
pub struct Args {
    #[arg(value_enum)]
    algorithm: Option<Algorithm>,
    /// TOML configuration file.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    kind: Option<ModeKind>,
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Gradient steps (gd) or outer iterations (alm).
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    chi_mode: Option<String>,
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    lambda_reg: Option<f64>,
    #[arg(long)]
    inner_iters: Option<usize>,
}

fn reject(set: bool, key: &str, algo: Algorithm) -> Result<()> {
    if set {
        return Err(config_err(format!("`{key}` does not apply to {algo:?}")));
    }
    Ok(())
}

fn single_run(config: OptimizerConfig<f64>, init: SamplingSet, summary: RestartSummary<f64>) -> OptimizerRun {
    OptimizerRun {
        config,
        best_angles: summary.best_angles.clone().unwrap_or(init),
        rho_trace: summary.rho_trace.clone(),
        best_mu: summary.best_mu,
        iterations_used: summary.iterations_used,
        best_restart: 0,
        restarts: vec![summary],
    }
}

pub fn optimize(c: &OptimizeConfig) -> Result<OptimizerRun> {
    let algo = c.algorithm.ok_or_else(|| config_err("choose an algorithm: gd or alm"))?;
    let degree = c.degree.ok_or_else(|| config_err("`degree` is required"))?;
    let init = match &c.init {
        Some(p) => Some(io::read_samples(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let k = match (c.k, &init) {
        (Some(k), Some(s)) if k != s.len() => {
            return Err(config_err(format!("k = {k} but the init file has {} samples", s.len())))
        }
        (Some(k), _) => k,
        (None, Some(s)) => s.len(),
        (None, None) => return Err(config_err("`k` is required")),
    };
    let chi_mode = c.chi_mode.as_deref().map(|s| parse_field::<ChiMode>("chi_mode", s)).transpose()?;
    if init.is_some() && c.restarts.is_some_and(|r| r != 1) {
        return Err(config_err("an init file runs a single restart"));
    }

    match algo {
        Algorithm::Gd => {
            let alm_only = c.tau.is_some()
                || c.lambda_reg.is_some()
                || c.eta_inner.is_some()
                || c.eta_z.is_some()
                || c.inner_iters.is_some()
                || c.dual_update.is_some();
            reject(alm_only, "alm parameters", algo)?;
            let mut g = GdConfig::new(c.kind, degree, k);
            g.seed = c.seed;
            g.restarts = c.restarts.unwrap_or(g.restarts);
            g.iterations = c.iterations.unwrap_or(g.iterations);
            g.p = c.p.unwrap_or(g.p);
            g.eta = c.eta.unwrap_or(g.eta);
            g.chi_mode = chi_mode.unwrap_or(g.chi_mode);
            match init {
                Some(s) => {
                    g.restarts = 1;
                    let summary = gd_restart(&g, s.clone(), 0)?;
                    Ok(single_run(OptimizerConfig::Gd(g), s, summary))
                }
                None => Ok(gd_optimize(&g)?),
            }
        }
        Algorithm::Alm => {
            reject(c.p.is_some() || c.eta.is_some(), "p and eta", algo)?;
            let mut a = AlmConfig::new(c.kind, degree, k);
            a.seed = c.seed;
            a.restarts = c.restarts.unwrap_or(a.restarts);
            a.iterations = c.iterations.unwrap_or(a.iterations);
            a.tau = c.tau.unwrap_or(a.tau);
            a.lambda_reg = c.lambda_reg.unwrap_or(a.lambda_reg);
            a.eta_inner = c.eta_inner.unwrap_or(a.eta_inner);
            a.eta_z = c.eta_z.unwrap_or(a.eta_z);
            a.inner_iters = c.inner_iters.unwrap_or(a.inner_iters);
            a.dual_update = c.dual_update.unwrap_or(a.dual_update);
            a.chi_mode = chi_mode.unwrap_or(a.chi_mode);
            match init {
                Some(s) => {
                    a.restarts = 1;
                    let (summary, _) = alm_restart(&a, s.clone(), 0)?;
                    Ok(single_run(OptimizerConfig::Alm(a), s, summary))
                }
                None => Ok(alm_optimize(&a)?),
            }
        }
    }
}

pub fn write_trace(path: &std::path::Path, run: &OptimizerRun) -> Result<()> {
    let residual: &[f64] =
        run.restarts.iter().find(|r| r.restart == run.best_restart).map_or(&[], |r| &r.residual_trace);
    if residual.is_empty() {
        let rows = run.rho_trace.iter().enumerate().map(|(i, r)| vec![i.to_string(), fmt_f64(*r)]);
        io::write_table(path, &["iteration", "rho"], rows)?;
    } else {
        // residual entry i belongs to outer iteration i + 1
        let rows = run.rho_trace.iter().enumerate().map(|(i, r)| {
            let res = if i == 0 { String::new() } else { residual.get(i - 1).map(|v| fmt_f64(*v)).unwrap_or_default() };
            vec![i.to_string(), fmt_f64(*r), res]
        });
        io::write_table(path, &["iteration", "rho", "residual"], rows)?;
    }
    Ok(())
}

pub fn run(args: Args, out_dir: Option<PathBuf>) -> Result<()> {
    let c: OptimizeConfig = config::resolve(args.config.as_deref(), super::overrides(&args, out_dir)?)?;
    config::echo(&c.out_dir, "optimize", &c)?;
    let run = optimize(&c)?;
    io::write_json(&c.out_dir.join("run.json"), &run)?;
    io::write_samples(&c.out_dir.join("angles.csv"), &run.best_angles, serde_json::to_value(&run.config)?)?;
    write_trace(&c.out_dir.join("rho_trace.csv"), &run)?;
    println!(
        "best coherence {:.6} (restart {}, {} iterations) written to {}",
        run.best_mu,
        run.best_restart,
        run.iterations_used,
        c.out_dir.display()
    );
    Ok(())
}
