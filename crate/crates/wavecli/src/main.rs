//! `wavecli <command> --config <file> [--out <dir>] [--seed <n>]`

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use clap::{Parser, Subcommand};
use config::RunConfig;
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "wavecli", about = "Radial wave experiments on the hyperbolic plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Linear propagation (integral representation and/or finite differences).
    Propagate(Args),
    /// Picard iteration for the nonlinear problem.
    Solve(Args),
    /// Decay-rate fit of the linear solution.
    Decay(Args),
    /// Contraction probe and ε-threshold search.
    Contraction(Args),
    /// Blow-up sequences, time bound and escape run.
    Blowup(Args),
    /// Certificate check against a simulated solution.
    Certify(Args),
}

#[derive(clap::Args, Clone)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn args(&self) -> &Args {
        match self {
            Command::Propagate(a)
            | Command::Solve(a)
            | Command::Decay(a)
            | Command::Contraction(a)
            | Command::Blowup(a)
            | Command::Certify(a) => a,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("WAVECLI_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("WAVECLI_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(cmd: &Command) -> Result<(), CliError> {
    configure_threads()?;
    let a = cmd.args();
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", a.config.display())))?;
    let cfg = RunConfig::parse(&text)?;
    cfg.validate()?;
    let dir = a.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let seed = a.seed.or(cfg.seed).unwrap_or(commands::DEFAULT_SEED);
    match cmd {
        Command::Propagate(_) => commands::propagate(&cfg, &dir),
        Command::Solve(_) => commands::solve(&cfg, &dir),
        Command::Decay(_) => commands::decay(&cfg, &dir),
        Command::Contraction(_) => commands::contraction(&cfg, &dir, seed),
        Command::Blowup(_) => commands::blowup(&cfg, &dir),
        Command::Certify(_) => commands::certify(&cfg, &dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wavecli: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
