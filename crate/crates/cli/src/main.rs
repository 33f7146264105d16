//! Experiment runner: scripted, seeded reproductions of the laboratory's
//! headline results. Every run writes its data files plus a manifest with
//! explicit pass/fail records; `--check` turns those records into the exit
//! code.

mod config;
mod experiments;
mod manifest;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use manifest::RunRecorder;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(String),
}

impl CliError {
    fn run(e: impl std::fmt::Display) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "pilotwave", version, about = "Pilot-wave dynamics and weak-measurement experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default runs/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit nonzero unless every exercised threshold passes.
    #[arg(long)]
    check: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Trajectory panels and screen statistics for three guidance laws.
    DoubleSlit(RunArgs),
    /// Map the operational velocity field and reconstruct streamlines.
    WeakProtocol(RunArgs),
    /// Correspondence-assumption discrepancy table, standard vs offset law.
    CorTest(RunArgs),
    /// Three-box projector weak values.
    ThreeBox(RunArgs),
    /// Equivariance KS reports per guidance law plus negative control.
    Equivariance(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::DoubleSlit(args) => dispatch(args, "double-slit", |c: &mut config::DoubleSlitConfig, s| c.seed = s, experiments::double_slit::run),
        Command::WeakProtocol(args) => dispatch(args, "weak-protocol", |c: &mut config::WeakProtocolConfig, s| c.seed = s, experiments::weak_protocol::run),
        Command::CorTest(args) => dispatch(args, "cor-test", |c: &mut config::CorTestConfig, s| c.seed = s, experiments::cor_test::run),
        Command::ThreeBox(args) => dispatch(args, "three-box", |c: &mut config::ThreeBoxConfig, s| c.seed = s, experiments::three_box::run),
        Command::Equivariance(args) => dispatch(args, "equivariance", |c: &mut config::EquivarianceConfig, s| c.seed = s, experiments::equivariance::run),
    };
    match result {
        Ok(passed) => {
            if passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: one or more checks failed");
                ExitCode::from(1)
            }
        }
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("run error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// returns Ok(true) when the run finished and (if --check) all checks passed
fn dispatch<C>(
    args: &RunArgs,
    name: &str,
    set_seed: impl Fn(&mut C, u64),
    run: impl Fn(&C, &mut RunRecorder) -> Result<(), CliError>,
) -> Result<bool, CliError>
where
    C: DeserializeOwned + Default + Serialize,
{
    let mut cfg: C = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => C::default(),
    };
    if let Some(seed) = args.seed {
        set_seed(&mut cfg, seed);
    }
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(name));
    let config_json =
        serde_json::to_string_pretty(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    let mut rec = RunRecorder::new(name, &config_json, &out_dir)?;
    std::fs::write(rec.out_dir().join("config.json"), &config_json)?;
    println!("{name} -> {}", out_dir.display());
    run(&cfg, &mut rec)?;
    let all_passed = rec.finish()?;
    Ok(!args.check || all_passed)
}
