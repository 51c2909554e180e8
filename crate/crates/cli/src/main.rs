mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

/// Evolutionary automata and EA theory lab.
#[derive(Debug, Parser)]
#[command(name = "evoauto", version)]
pub struct Cli {
    /// Root seed; overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Level budget for terminal-mode acceptance.
    #[arg(long, global = true, default_value_t = 64)]
    levels: usize,
    /// Step budget per level run.
    #[arg(long, global = true, default_value_t = 10_000)]
    steps: u64,
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide a word in terminal mode.
    Accept { efa: String, word: String },
    /// Execute the `[ea_run]` section and write its trace.
    Run,
    /// Run lab experiments and write their reports.
    Verify { which: Which },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    All,
    Convergence,
    Nfl,
    Schema,
    Esrate,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Internal(_) => 70,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Accept { efa, word } => commands::accept(&cli, efa, word),
        Command::Run => commands::run(&cli),
        Command::Verify { which } => commands::verify(&cli, *which),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("evoauto: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
