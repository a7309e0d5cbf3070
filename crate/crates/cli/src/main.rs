//! One binary, subcommand style. All randomness flows from `--seed`
//! through named substreams, so every command is bit-reproducible; worker
//! parallelism (`--jobs`) never changes numeric output.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config files: exit code 2.
    Usage(String),
    /// Failures while running: exit code 1.
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<netcl_core::Error> for CliError {
    fn from(e: netcl_core::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "netcl",
    version,
    about = "Train and evaluate RL policies for network adaptation with curriculum-driven environment selection"
)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic trace files from an environment space.
    GenTraces(commands::gen_traces::Args),
    /// Train a policy with the selected curriculum.
    Train(commands::train::Args),
    /// Search the environment space for large-gap configurations.
    Search(commands::search::Args),
    /// Compare policies over shared environments or recorded traces.
    Eval(commands::eval::Args),
    /// Summarize the outputs of previous commands in a directory.
    Report(commands::report::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: failed to size thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::GenTraces(args) => commands::gen_traces::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Search(args) => commands::search::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Report(args) => commands::report::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Shared flag pair: builtin preset or custom space file.
#[derive(Debug, clap::Args)]
pub struct SpaceArgs {
    /// Builtin environment box: rl1, rl2, or rl3.
    #[arg(long, conflicts_with = "space_file")]
    preset: Option<String>,

    /// Custom space file (same schema as the bundled presets).
    #[arg(long)]
    space_file: Option<PathBuf>,
}

impl SpaceArgs {
    pub fn load(&self, use_case: netcl_core::UseCase) -> CliResult<netcl_core::space::SpaceFile> {
        config::load_space(use_case, self.preset.as_deref(), self.space_file.as_deref())
    }
}
