//! `polycyclic`: command-line front end for the polycycle toolkit.
//!
//! Usage: `polycyclic <command> --config <path> [--out <dir>] [--seed <n>]
//! [--threads <n>]`. Exit codes: 0 success, 1 computation failed,
//! 2 config error.

mod commands;
mod config;

use clap::{Parser, ValueEnum};
use config::{config_hash, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Command {
    /// Compute a Dulac map and compare it against the ODE oracle
    Dulac,
    /// Count limit cycles of a polycycle over a parameter sweep
    Cyclicity,
    /// Hironaka-style division in the local ring
    Divide,
    /// Wronskian of the degree-n monomial family
    Wronskian,
    /// Verify the quasi-spherical blow-up identities
    Blowup,
    /// Run the deterministic invariant suite of every module
    Selftest,
}

#[derive(Parser, Debug)]
#[command(name = "polycyclic", version, about = "polycycle cyclicity toolkit")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON job configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: current directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized property sweeps
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parameter sweeps (fallback: POLYCYCLIC_THREADS)
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let (cfg, bytes) = commands::load_config(&cli.config)?;
    let seed = cli.seed.unwrap_or(0);
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("POLYCYCLIC_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1)
        .max(1);
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {}", out.display(), e)))?;
    let ctx = commands::Ctx {
        out,
        seed,
        threads,
        hash: config_hash(&bytes, seed),
    };
    match cli.command {
        Command::Dulac => commands::cmd_dulac(&cfg, &ctx),
        Command::Cyclicity => commands::cmd_cyclicity(&cfg, &ctx),
        Command::Divide => commands::cmd_divide(&cfg, &ctx),
        Command::Wronskian => commands::cmd_wronskian(&cfg, &ctx),
        Command::Blowup => commands::cmd_blowup(&cfg, &ctx),
        Command::Selftest => commands::cmd_selftest(&cfg, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ CliError::Compute(_)) => {
            eprintln!("{}", e);
            ExitCode::from(1)
        }
        Err(e @ CliError::Config(_)) => {
            eprintln!("{}", e);
            ExitCode::from(2)
        }
    }
}
