use std::path::PathBuf;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use snfcs::harness::{farfield_demo, write_cut_csv, write_farfield_csv, FarfieldConfig, OptimizerBudget, Sampler, SmcModel};
use snfcs::{io, ModeKind};

use super::BpSection;
use crate::config::{self, config_err};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FarfieldCliConfig {
    pub kind: ModeKind,
    pub degree: Option<u32>,
    pub k_values: Vec<usize>,
    pub sampler: Sampler,
    pub smc_model: SmcModel,
    pub sparsity: usize,
    pub seed: u64,
    pub trials: usize,
    pub phi_cut: f64,
    pub theta_step_deg: f64,
    pub reference_step_deg: u32,
    pub out_dir: PathBuf,
    pub bp: BpSection,
    pub budget: OptimizerBudget,
}

impl Default for FarfieldCliConfig {
    fn default() -> Self {
        let d = FarfieldConfig::new(1, Vec::new(), Sampler::Spiral);
        Self {
            kind: d.kind,
            degree: None,
            k_values: d.k_values,
            sampler: d.sampler,
            smc_model: d.smc_model,
            sparsity: d.sparsity,
            seed: d.seed,
            trials: d.trials,
            phi_cut: d.phi_cut,
            theta_step_deg: d.theta_step_deg,
            reference_step_deg: d.reference_step_deg,
            out_dir: config::default_out_dir(),
            bp: BpSection::default(),
            budget: OptimizerBudget::default(),
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
    kind: Option<ModeKind>,
    #[arg(long)]
    degree: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    k_values: Option<Vec<usize>>,
    #[arg(long)]
    sampler: Option<Sampler>,
    #[arg(long)]
    sparsity: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    theta_step_deg: Option<f64>,
    #[arg(long)]
    reference_step_deg: Option<u32>,
    #[arg(long)]
    #[serde(skip)]
    restarts: Option<usize>,
}

pub fn run(args: Args, out_dir: Option<PathBuf>) -> Result<()> {
    let mut o = super::overrides(&args, out_dir)?;
    o.set_in("budget", "restarts", args.restarts.map(|v| v as i64));
    let c: FarfieldCliConfig = config::resolve(args.config.as_deref(), o)?;
    let degree = c.degree.ok_or_else(|| config_err("`degree` is required"))?;
    config::echo(&c.out_dir, "farfield", &c)?;
    let ff = FarfieldConfig {
        kind: c.kind,
        degree,
        k_values: c.k_values.clone(),
        sampler: c.sampler,
        smc_model: c.smc_model,
        sparsity: c.sparsity,
        seed: c.seed,
        trials: c.trials,
        phi_cut: c.phi_cut,
        theta_step_deg: c.theta_step_deg,
        reference_step_deg: c.reference_step_deg,
        bp: c.bp.options(),
        budget: c.budget,
    };
    let report = farfield_demo(&ff)?;
    write_farfield_csv(&c.out_dir.join("farfield.csv"), &report)?;
    io::write_json(&c.out_dir.join("farfield.json"), &report)?;
    write_cut_csv(&c.out_dir.join("cut_truth.csv"), &report.truth_cut)?;
    for (k, cut) in &report.cuts {
        write_cut_csv(&c.out_dir.join(format!("cut_k{k}.csv")), cut)?;
    }
    println!("L = {}", report.mode_count);
    for r in report.rows.iter().chain(std::iter::once(&report.reference)) {
        println!("{:<22} K={:<5} max {:>9.4} dB  mean {:>9.4} dB", r.label, r.k, r.max_db, r.mean_db);
    }
    Ok(())
}
