//! Scenario runner CLI.
//!
//! `chainprobe run <config.toml>` executes a scenario and prints the emitted
//! artifact paths; `chainprobe kinds` lists the available scenario kinds.
//! Exit codes: 0 success, 2 config parse error, 3 validation error,
//! 4 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chainprobe::scenario::{list_kinds, run_scenario};

#[derive(Parser)]
#[command(
    name = "chainprobe",
    about = "Supplier accountability investigation and contract design scenarios",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and emit its CSV artifacts plus a manifest.
    Run {
        /// Path to the scenario TOML file.
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the scenario kinds with their parameters and outputs.
    Kinds,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, seed, out } => match run_scenario(&config, seed, out.as_deref()) {
            Ok(paths) => {
                for path in paths {
                    println!("{}", path.display());
                }
                ExitCode::SUCCESS
            }
            Err(err) => {
                eprintln!("{err}");
                ExitCode::from(err.exit_code() as u8)
            }
        },
        Command::Kinds => {
            print!("{}", list_kinds());
            ExitCode::SUCCESS
        }
    }
}
