use std::path::PathBuf;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use snfcs::harness::{phase_transition, write_phase_csv, Contour, OptimizerBudget, PhaseGridConfig, Sampler};
use snfcs::io::{self, fmt_f64};
use snfcs::ModeKind;

use super::BpSection;
use crate::config::{self, config_err};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseConfig {
    pub kind: ModeKind,
    pub degree: Option<u32>,
    pub sampler: Sampler,
    pub k_over_l: Vec<f64>,
    pub s_over_k: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub rel_tol: f64,
    pub out_dir: PathBuf,
    pub bp: BpSection,
    pub budget: OptimizerBudget,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        let desk = PhaseGridConfig::desk(ModeKind::SphericalHarmonics, 1, Sampler::Spiral);
        Self {
            kind: desk.kind,
            degree: None,
            sampler: desk.sampler,
            k_over_l: desk.k_over_l,
            s_over_k: desk.s_over_k,
            trials: desk.trials,
            seed: desk.seed,
            rel_tol: desk.rel_tol,
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
    #[arg(long)]
    sampler: Option<Sampler>,
    #[arg(long, value_delimiter = ',')]
    k_over_l: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    s_over_k: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    restarts: Option<usize>,
}

fn contour_field(c: &Contour) -> String {
    match c {
        Contour::Below => "below".into(),
        Contour::Above => "above".into(),
        Contour::At(v) => fmt_f64(*v),
    }
}

pub fn run(args: Args, out_dir: Option<PathBuf>) -> Result<()> {
    let mut o = super::overrides(&args, out_dir)?;
    o.set_in("budget", "restarts", args.restarts.map(|v| v as i64));
    let c: PhaseConfig = config::resolve(args.config.as_deref(), o)?;
    let degree = c.degree.ok_or_else(|| config_err("`degree` is required"))?;
    config::echo(&c.out_dir, "phase", &c)?;
    let grid = PhaseGridConfig {
        kind: c.kind,
        degree,
        k_over_l: c.k_over_l.clone(),
        s_over_k: c.s_over_k.clone(),
        trials: c.trials,
        sampler: c.sampler,
        seed: c.seed,
        rel_tol: c.rel_tol,
        bp: c.bp.options(),
        budget: c.budget,
    };
    let r = phase_transition(&grid)?;
    write_phase_csv(&c.out_dir.join("phase.csv"), &r)?;
    io::write_json(&c.out_dir.join("phase.json"), &r)?;
    let rows = c.k_over_l.iter().zip(&r.k_values).zip(&r.contour50).map(|((x, k), ct)| {
        vec![fmt_f64(*x), k.to_string(), contour_field(ct)]
    });
    io::write_table(&c.out_dir.join("contour.csv"), &["k_over_l", "k", "s_over_k_50"], rows)?;
    for ((x, k), ct) in c.k_over_l.iter().zip(&r.k_values).zip(&r.contour50) {
        println!("K/L={x:.3} K={k:<5} 50% contour at s/K = {}", contour_field(ct));
    }
    if r.unconverged > 0 {
        eprintln!("warning: {} trial(s) hit the solver iteration limit", r.unconverged);
    }
    Ok(())
}
