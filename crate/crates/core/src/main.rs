use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use openbc::cli::{harness, parse_config, CliError};

/// Energy-stable open boundary conditions: experiment runner and
/// admissibility checker.
#[derive(Parser)]
#[command(name = "openbc", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Directory for trace/report artifacts.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the config's seed (recorded in reports for provenance).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Eigenvalue tolerance for admissibility certificates and the identity
    /// tolerance for `audit`.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment config and emit a CSV trace plus a JSON report.
    Run { config: PathBuf },
    /// Run a multi-grid convergence study on a manufactured-solution config.
    Converge { config: PathBuf },
    /// Check R/S admissibility for a boundary matrix, from a JSON input
    /// {a, normal, r, s}.
    BcCheck { input: PathBuf },
    /// Recompute the verdicts of an existing CSV trace.
    Audit { trace: PathBuf },
}

fn load_config(path: &PathBuf, seed: Option<u64>) -> Result<openbc::cli::ExperimentConfig, CliError> {
    let text = fs::read_to_string(path)?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    match &cli.cmd {
        Cmd::Run { config } => {
            let config = load_config(config, cli.seed)?;
            let report = harness::run_experiment(&config, &cli.out_dir)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.ok() {
                return Err(CliError::Audit(format!(
                    "energy identity pass={}, bound status={}",
                    report.energy_identity.pass, report.bound.status
                )));
            }
            Ok(true)
        }
        Cmd::Converge { config } => {
            let config = load_config(config, cli.seed)?;
            let report = harness::run_convergence(&config, &cli.out_dir)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(true)
        }
        Cmd::BcCheck { input } => {
            let text = fs::read_to_string(input)?;
            let parsed: harness::BcCheckInput =
                serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
            let out = harness::bc_check(&parsed, cli.tol.unwrap_or(1e-12))?;
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(true)
        }
        Cmd::Audit { trace } => {
            let out = harness::audit_trace(trace, cli.tol.unwrap_or(harness::IDENTITY_TOL_WEAK))?;
            println!("{}", serde_json::to_string_pretty(&out)?);
            if !out.energy_identity.pass || out.bound.status == "fail" {
                return Err(CliError::Audit(format!(
                    "energy identity pass={}, bound status={}",
                    out.energy_identity.pass, out.bound.status
                )));
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
