use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mulimit_cli::commands::{cmd_diagram, cmd_oracle, cmd_run};
use mulimit_cli::config::{parse_config, ExperimentConfig};
use mulimit_cli::CliError;

/// Reproducible μ-limit experiments.
#[derive(Parser)]
#[command(name = "mulimit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run all trials and write densities.csv, segments.csv and verdicts.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Exit with status 2 when any verdict is inconclusive.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the exact predecessor count, candidate count and measure.
    Oracle {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the space-time diagram of one trial.
    Diagram {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Parse { line, message } => {
            CliError::Parse { line, message: format!("{}: {message}", path.display()) }
        }
        other => other,
    })
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Run { config, strict, out } => {
            let config = load(&config)?;
            let out = out.unwrap_or_else(|| config.out.clone());
            let summary = cmd_run(&config, &out)?;
            for v in &summary.verdicts {
                println!("{}", v.class.name());
            }
            Ok(if strict && summary.any_inconclusive() { 2 } else { 0 })
        }
        Command::Oracle { config } => {
            let config = load(&config)?;
            cmd_oracle(&config, &mut std::io::stdout().lock())?;
            Ok(0)
        }
        Command::Diagram { config, trial, out } => {
            let config = load(&config)?;
            let out = out.unwrap_or_else(|| config.out.clone());
            let path = cmd_diagram(&config, trial, &out)?;
            println!("{}", path.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
