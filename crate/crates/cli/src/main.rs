use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lmes_cli::{run, CliError, CommandKind, ConfigFile, ExperimentConfig, Overrides, Summary};

/// Recurrence purification experiments on π-phase LME states.
#[derive(Debug, Parser)]
#[command(name = "lmes", version)]
struct Args {
    /// What to run; may also be given as `command` in the config file.
    #[arg(value_enum)]
    command: Option<CommandKind>,

    /// TOML experiment configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Output directory (default `results`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Bisection or comparison tolerance.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,

    #[arg(long, value_name = "N")]
    max_rounds: Option<usize>,

    /// Preconfigured target state; repeat for several.
    #[arg(long = "scenario", value_name = "NAME")]
    scenarios: Vec<String>,
}

fn execute(args: Args) -> Result<Summary, CliError> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let flags = Overrides {
        command: args.command,
        seed: args.seed,
        out: args.out,
        tol: args.tol,
        max_rounds: args.max_rounds,
        scenarios: args.scenarios,
    };
    run(&ExperimentConfig::resolve(file, flags)?)
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(summary) => {
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", summary.line);
            ExitCode::from(summary.status.code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status.code())
        }
    }
}
