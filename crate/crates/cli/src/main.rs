//! `hydride`: runs a scenario file in one of the four modes.
//!
//! Exit codes: 0 success, 2 invalid configuration or data, 3 solver failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hydride::error::DriverError;
use hydride::scenario::{execute, load_scenario, parse_scenario, Mode};

#[derive(Debug, Parser)]
#[command(name = "hydride", version, about = "Hydrogen storage phase-transition simulator")]
struct Cli {
    /// Mode to run; same as `--mode`.
    #[arg(value_name = "MODE", conflicts_with = "mode")]
    command: Option<Mode>,
    /// Flat `key = value` scenario file; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Extra `key=value` line applied after the file; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// run, steady-check, decay-study or convergence-study.
    #[arg(long, value_name = "MODE")]
    mode: Option<Mode>,
}

fn run(cli: Cli) -> Result<String, DriverError> {
    let (mut scenario, base) = match &cli.config {
        Some(path) => load_scenario(path, &cli.overrides)?,
        None => (parse_scenario("", &cli.overrides)?, PathBuf::from(".")),
    };
    if let Some(mode) = cli.mode.or(cli.command) {
        scenario.mode = mode;
    }
    if let Some(out) = cli.out {
        scenario.output_dir = out;
    }
    let outcome = execute(&scenario, &base)?;
    Ok(format!("output written to {}\n{}", scenario.output_dir.display(), outcome.summary()))
}

fn report(err: DriverError) -> ExitCode {
    let code = if err.is_validation() { 2 } else { 3 };
    let dump: Option<PathBuf> = match &err {
        DriverError::Solver { dump, .. } => dump.clone(),
        _ => None,
    };
    eprintln!("error: {:#}", anyhow::Error::from(err));
    if let Some(path) = dump {
        eprintln!("last accepted state dumped to {}", path.display());
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => report(err),
    }
}
