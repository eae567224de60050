//! `snfcs` command-line front end.
//!
//! Every subcommand reads an optional TOML config (`--config`), applies flag
//! overrides on top, writes the resolved configuration to
//! `<out_dir>/resolved_config.toml` and then its outputs next to it.
//! Exit codes: 0 on success, 2 for usage or configuration errors, 3 for
//! runtime failures.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ConfigError;

#[derive(Parser, Debug)]
#[command(name = "snfcs", version, about = "Low-coherence sampling design for spherical near-field measurements")]
struct Cli {
    /// Output directory; overrides `out_dir` in the config file.
    #[arg(long, global = true, env = "SNFCS_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "SNFCS_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a sampling set.
    Sample(commands::sample::Args),
    /// Coherence of a sampling file, or a coherence-versus-K benchmark.
    Coherence(commands::coherence::Args),
    /// Optimize sampling angles for low coherence.
    Optimize(commands::optimize::Args),
    /// Basis-pursuit recovery of a coefficient vector.
    Recover(commands::recover::Args),
    /// Phase-transition grid of recovery success rates.
    Phase(commands::phase::Args),
    /// Synthetic far-field reconstruction error versus K.
    Farfield(commands::farfield::Args),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| config::config_err(format!("cannot set up {jobs} worker threads: {e}")))?;
    }
    let out = cli.out_dir;
    match cli.command {
        Command::Sample(a) => commands::sample::run(a, out),
        Command::Coherence(a) => commands::coherence::run(a, out),
        Command::Optimize(a) => commands::optimize::run(a, out),
        Command::Recover(a) => commands::recover::run(a, out),
        Command::Phase(a) => commands::phase::run(a, out),
        Command::Farfield(a) => commands::farfield::run(a, out),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let config = err.chain().any(|e| {
        e.downcast_ref::<ConfigError>().is_some()
            || matches!(e.downcast_ref::<snfcs::Error>(), Some(snfcs::Error::InvalidArgument(_)))
    });
    if config {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
