use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use flexion_cli::{config, run};

/// Large-deflection cantilever solver: swarm-searched tip locus with a
/// deterministic Newton shooting cross-check.
#[derive(Parser)]
#[command(name = "flexion", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve every load case in a config with the swarm, cross-checked by
    /// the oracle, and write curves, traces and a summary
    Solve {
        /// TOML run configuration
        config: PathBuf,
        /// Override the master seed from the config
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory from the config
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads for the case sweep
        #[arg(long)]
        jobs: Option<usize>,
        /// Skip the oracle cross-check
        #[arg(long)]
        no_oracle: bool,
        /// Retry non-converged cases this many times with fresh seeds
        #[arg(long)]
        retries: Option<usize>,
    },
    /// Solve every load case with the Newton shooting oracle only
    Oracle {
        /// TOML run configuration
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Append normalized errors between a solve summary and measured tips
    Compare {
        /// summary.csv from a solve run
        summary: PathBuf,
        /// Measured tips: case_id,Qxm,Qym in metres
        measured: PathBuf,
        /// Comparison output path (default: comparison.csv next to the summary)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate random width knots for a non-uniform beam
    GenWidths {
        /// Lower width bound (mm, or m with --si)
        #[arg(long)]
        lower: f64,
        /// Upper width bound (mm, or m with --si)
        #[arg(long)]
        upper: f64,
        /// Number of knots (segments + 1)
        #[arg(long)]
        knots: usize,
        #[arg(long)]
        seed: u64,
        /// Emit metres instead of millimetres
        #[arg(long)]
        si: bool,
    },
}

fn load_config(path: &PathBuf) -> Result<config::RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    config::parse_config(&text).with_context(|| format!("invalid config {}", path.display()))
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve {
            config,
            seed,
            out_dir,
            jobs,
            no_oracle,
            retries,
        } => {
            let mut run_config = load_config(&config)?;
            run::apply_overrides(&mut run_config, seed, out_dir, jobs, no_oracle, retries);
            run::run_solve(&run_config)
        }
        Command::Oracle {
            config,
            out_dir,
            jobs,
        } => {
            let mut run_config = load_config(&config)?;
            run::apply_overrides(&mut run_config, None, out_dir, jobs, false, None);
            run::run_oracle(&run_config)
        }
        Command::Compare {
            summary,
            measured,
            out,
        } => {
            let out = out.unwrap_or_else(|| {
                summary
                    .parent()
                    .map(|dir| dir.join("comparison.csv"))
                    .unwrap_or_else(|| PathBuf::from("comparison.csv"))
            });
            run::run_compare(&summary, &measured, &out)
        }
        Command::GenWidths {
            lower,
            upper,
            knots,
            seed,
            si,
        } => run::run_gen_widths(lower, upper, knots, seed, si),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(1)
        }
    }
}
