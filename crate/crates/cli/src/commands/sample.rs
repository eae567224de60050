use std::path::PathBuf;

use anyhow::Result;
use serde::{Deserialize, Serialize};
use snfcs::harness::{default_chi_policy, sampler_set, OptimizerBudget, Sampler};
use snfcs::sampling::{apply_chi, equiangular, hammersley, random_uniform, spiral};
use snfcs::{ChiPolicy, ModeKind, SamplingSet};

use crate::config::{self, config_err, parse_field};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Source {
    Spiral,
    Hammersley,
    Random,
    Equiangular,
    OptimizedGd,
    OptimizedAlm,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleConfig {
    pub sampler: Source,
    /// Sample count; implied by `step_deg` for the equiangular grid.
    pub k: Option<usize>,
    pub seed: u64,
    /// `even_spread`, `alternate_pair`, `fixed:<radians>` or `free`.
    pub chi_policy: Option<String>,
    /// Basis the set is meant for; picks the default polarization policy.
    pub kind: Option<ModeKind>,
    pub degree: Option<u32>,
    pub step_deg: u32,
    pub out_dir: PathBuf,
    pub file: String,
    pub budget: OptimizerBudget,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            sampler: Source::Spiral,
            k: None,
            seed: 0,
            chi_policy: None,
            kind: None,
            degree: None,
            step_deg: 10,
            out_dir: config::default_out_dir(),
            file: "samples.csv".into(),
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
    #[arg(long, value_enum)]
    sampler: Option<Source>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    chi_policy: Option<String>,
    #[arg(long)]
    kind: Option<ModeKind>,
    #[arg(long)]
    degree: Option<u32>,
    /// Grid step of the equiangular sampler, in degrees.
    #[arg(long)]
    step_deg: Option<u32>,
    /// Output file name inside the output directory.
    #[arg(long)]
    file: Option<String>,
}

fn need<T>(v: Option<T>, what: &str, sampler: Source) -> Result<T> {
    v.ok_or_else(|| config_err(format!("sampler {sampler:?} needs `{what}`")))
}

pub fn generate(c: &SampleConfig) -> Result<SamplingSet> {
    let optimized = match c.sampler {
        Source::OptimizedGd => Some(Sampler::OptimizedGd),
        Source::OptimizedAlm => Some(Sampler::OptimizedAlm),
        _ => None,
    };
    if let Some(s) = optimized {
        if c.chi_policy.is_some() {
            return Err(config_err("chi_policy does not apply to optimized samplers"));
        }
        let kind = need(c.kind, "kind", c.sampler)?;
        let degree = need(c.degree, "degree", c.sampler)?;
        let k = need(c.k, "k", c.sampler)?;
        return Ok(sampler_set(s, kind, degree, k, c.seed, &c.budget)?);
    }

    let policy: ChiPolicy = match (&c.chi_policy, c.kind) {
        (Some(p), _) => parse_field("chi_policy", p)?,
        (None, Some(ModeKind::WignerGeneral)) | (None, None) if c.sampler == Source::Random => ChiPolicy::Free,
        (None, Some(kind)) => default_chi_policy(kind),
        (None, None) => ChiPolicy::EvenSpread,
    };
    let paired = policy == ChiPolicy::AlternatePair;
    let spatial = if c.sampler == Source::Equiangular {
        let grid = equiangular(c.step_deg)?;
        let total = if paired { 2 * grid.len() } else { grid.len() };
        if c.k.is_some_and(|k| k != total) {
            return Err(config_err(format!("a {} degree grid has {total} samples, not {}", c.step_deg, c.k.unwrap())));
        }
        grid
    } else {
        let k = need(c.k, "k", c.sampler)?;
        if paired && k % 2 != 0 {
            return Err(config_err(format!("alternate_pair needs an even k, got {k}")));
        }
        let n = if paired { k / 2 } else { k };
        match c.sampler {
            Source::Spiral => spiral(n)?,
            Source::Hammersley => hammersley(n)?,
            _ => random_uniform(n, c.seed)?,
        }
    };
    let set = if paired { spatial.duplicate_pairs() } else { spatial };
    Ok(apply_chi(&set, policy)?)
}

pub fn run(args: Args, out_dir: Option<PathBuf>) -> Result<()> {
    let c: SampleConfig = config::resolve(args.config.as_deref(), super::overrides(&args, out_dir)?)?;
    config::echo(&c.out_dir, "sample", &c)?;
    let set = generate(&c)?;
    let path = c.out_dir.join(&c.file);
    snfcs::io::write_samples(&path, &set, serde_json::to_value(&c)?)?;
    println!("wrote {} samples to {}", set.len(), path.display());
    Ok(())
}
