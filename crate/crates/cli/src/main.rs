//! Command-line front end: scenario configuration, the four subcommands, and
//! file emission.
//!
//! Exit codes: 0 success, 2 input validation, 3 domain/design error,
//! 4 integration failure.

// validation sites use `!(x > 0.0)` so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Design and simulation of broadband sum-frequency generation in
/// aperiodically poled crystals.
#[derive(Parser)]
#[command(name = "sfg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (default: the scenario's output.dir, or "out").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario's relative tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Override the scenario's absolute tolerance.
    #[arg(long)]
    abs_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the dispersion model for a wavelength triple.
    Material {
        /// Material JSON file.
        #[arg(long)]
        material: PathBuf,
        #[arg(long)]
        lambda1_um: f64,
        #[arg(long)]
        lambda2_um: f64,
        #[arg(long, default_value_t = 25.0)]
        temperature_c: f64,
    },
    /// Emit the designed drive profile and its diagnostics.
    Design {
        #[command(flatten)]
        common: ScenarioArgs,
    },
    /// Integrate the designed drive and emit the trajectory.
    Propagate {
        #[command(flatten)]
        common: ScenarioArgs,
    },
    /// Run a wavelength/temperature efficiency sweep.
    Sweep {
        #[command(flatten)]
        common: ScenarioArgs,
        /// Worker threads for grid evaluation (0 = all cores). Changes
        /// runtime, never output bytes.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
}

/// Error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn validation(message: String) -> Self {
        Self { code: 2, message }
    }

    fn other(message: String) -> Self {
        Self { code: 1, message }
    }
}

impl From<sfg_core::Error> for CliError {
    fn from(e: sfg_core::Error) -> Self {
        use sfg_core::Error::*;
        let code = match &e {
            Material(_) | Contract(_) => 2,
            Domain(_) | Design(_) | Singularity { .. } => 3,
            Integration { .. } => 4,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::other(e.to_string())
    }
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Material { material, lambda1_um, lambda2_um, temperature_c } => {
            commands::material::run(&material, lambda1_um, lambda2_um, temperature_c)
        }
        Command::Design { common } => {
            let resolved = load_with_overrides(&common)?;
            let out = common.out.unwrap_or_else(|| resolved.output_dir.clone());
            commands::design::run(&resolved, &out)
        }
        Command::Propagate { common } => {
            let resolved = load_with_overrides(&common)?;
            let out = common.out.unwrap_or_else(|| resolved.output_dir.clone());
            commands::propagate::run(&resolved, &out)
        }
        Command::Sweep { common, workers } => {
            let resolved = load_with_overrides(&common)?;
            let out = common.out.unwrap_or_else(|| resolved.output_dir.clone());
            commands::sweep::run(&resolved, &out, workers)
        }
    }
}

fn load_with_overrides(args: &ScenarioArgs) -> Result<scenario::ResolvedScenario, CliError> {
    let mut resolved = scenario::load(&args.scenario)?;
    if let Some(rel) = args.rel_tol {
        resolved.solver.rel_tol = rel;
    }
    if let Some(abs) = args.abs_tol {
        resolved.solver.abs_tol = abs;
    }
    resolved.solver.validate().map_err(CliError::from)?;
    Ok(resolved)
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
