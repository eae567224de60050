use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use snfcs::harness::{coherence_benchmark, write_coherence_csv, OptimizerBudget, Sampler};
use snfcs::sensing::build_matrix;
use snfcs::{io, ModeKind};

use crate::config::{self, config_err};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoherenceConfig {
    pub kind: ModeKind,
    pub degree: Option<u32>,
    /// Sampling CSV to evaluate; without it the sampler benchmark runs.
    pub samples: Option<PathBuf>,
    pub k_values: Vec<usize>,
    pub samplers: Vec<Sampler>,
    /// Random draws or optimizer restarts per benchmark cell.
    pub draws: usize,
    pub seed: u64,
    /// Angle tolerance for the repeated-sample warning.
    pub repeat_tol: f64,
    /// Also write the sensing matrix as `matrix.json`.
    pub export_matrix: bool,
    pub out_dir: PathBuf,
    pub budget: OptimizerBudget,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        Self {
            kind: ModeKind::SphericalHarmonics,
            degree: None,
            samples: None,
            k_values: Vec::new(),
            samplers: vec![Sampler::Spiral, Sampler::Hammersley, Sampler::Random],
            draws: 5,
            seed: 0,
            repeat_tol: 1e-12,
            export_matrix: false,
            out_dir: config::default_out_dir(),
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
    samples: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    k_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    samplers: Option<Vec<Sampler>>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    export_matrix: bool,
}

/// Coherence of one sampling file.
#[derive(Debug, Serialize, Deserialize)]
pub struct CoherenceSummary {
    pub kind: ModeKind,
    pub degree: u32,
    pub samples: PathBuf,
    pub rows: usize,
    pub cols: usize,
    pub mu: f64,
    pub welch: f64,
    pub argmax_pair: (usize, usize),
    pub pair_count: usize,
    pub repeated_pairs: usize,
}

pub fn run(args: Args, out_dir: Option<PathBuf>) -> Result<()> {
    let c: CoherenceConfig = config::resolve(args.config.as_deref(), super::overrides(&args, out_dir)?)?;
    let degree = c.degree.ok_or_else(|| config_err("`degree` is required"))?;
    config::echo(&c.out_dir, "coherence", &c)?;

    match &c.samples {
        Some(path) => {
            let set = io::read_samples(path).with_context(|| format!("reading {}", path.display()))?;
            let repeated = set.repeated_samples(c.repeat_tol);
            if let Some((i, j)) = repeated.first() {
                eprintln!(
                    "warning: {} repeated sample pair(s), first at rows {i} and {j}; coherence will sit near its maximum",
                    repeated.len()
                );
            }
            let a = build_matrix(c.kind, degree, &set)?;
            let report = a.coherence()?;
            if c.export_matrix {
                io::write_matrix_json(&c.out_dir.join("matrix.json"), &a)?;
            }
            let summary = CoherenceSummary {
                kind: c.kind,
                degree,
                samples: path.clone(),
                rows: a.rows(),
                cols: a.cols(),
                mu: report.mu,
                welch: report.welch,
                argmax_pair: report.argmax_pair,
                pair_count: report.pair_count,
                repeated_pairs: repeated.len(),
            };
            io::write_json(&c.out_dir.join("coherence.json"), &summary)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        None => {
            if c.k_values.is_empty() {
                return Err(config_err("give either `samples` or `k_values`"));
            }
            let rows = coherence_benchmark(c.kind, degree, &c.k_values, &c.samplers, c.draws, c.seed, &c.budget)?;
            write_coherence_csv(&c.out_dir.join("coherence_vs_k.csv"), &rows)?;
            io::write_json(&c.out_dir.join("coherence_vs_k.json"), &rows)?;
            for r in &rows {
                println!("{:<14} K={:<5} mean={:.6} std={:.6} welch={:.6}", r.sampler, r.k, r.mean, r.std, r.welch);
            }
        }
    }
    Ok(())
}
