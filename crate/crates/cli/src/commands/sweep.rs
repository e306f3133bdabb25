//! `sfg sweep`: batch efficiency study over a wavelength or temperature grid.

use std::path::Path;

use sfg_core::sweeps::{run_sweep, temperature_detuning_report, SchemeConfig, SweepAxis, SweepSpec};

use crate::output::{atomic_write, csv_provenance_line, scenario_digest};
use crate::scenario::{ResolvedScenario, SchemeBlock};
use crate::CliError;

pub fn run(scenario: &ResolvedScenario, out_dir: &Path, workers: usize) -> Result<(), CliError> {
    let sweep = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::validation("sweep: scenario has no sweep block".into()))?;

    let scheme = match &scenario.scheme {
        SchemeBlock::Adiabatic => SchemeConfig::Adiabatic,
        SchemeBlock::Cd => SchemeConfig::Cd,
        SchemeBlock::LzOptimal { coeffs, .. } => SchemeConfig::LzOptimal { coeffs: coeffs.clone() },
    };
    let spec = SweepSpec {
        scheme,
        axis: sweep.axis,
        axis_range: sweep.range,
        points: sweep.points,
        setup: scenario.setup.clone(),
        crystal: scenario.crystal,
        families: sweep.families.clone(),
        design_frozen: sweep.design_frozen,
    };

    let mut result = run_sweep(&spec, &scenario.solver, workers)?;
    let digest = scenario_digest(&scenario.scenario_bytes);
    result.provenance.scenario_digest = Some(digest.clone());

    let stem = scenario
        .scenario_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());

    if scenario.formats.0 {
        let mut body = Vec::new();
        result.write_csv(&mut body).map_err(|e| CliError::other(e.to_string()))?;
        let mut csv = csv_provenance_line(&digest).into_bytes();
        csv.extend_from_slice(&body);
        atomic_write(&out_dir.join(format!("{stem}.sweep.csv")), &csv)?;
    }
    if scenario.formats.1 {
        let mut doc = serde_json::to_value(&result).map_err(|e| CliError::other(e.to_string()))?;
        if matches!(sweep.axis, SweepAxis::Temperature) {
            // the detuning table explains the sweep bandwidth
            let report = temperature_detuning_report(&scenario.setup, sweep.range, sweep.points)?;
            doc["temperature_detuning"] =
                serde_json::to_value(&report).map_err(|e| CliError::other(e.to_string()))?;
        }
        atomic_write(
            &out_dir.join(format!("{stem}.sweep.json")),
            serde_json::to_string_pretty(&doc)
                .map_err(|e| CliError::other(e.to_string()))?
                .as_bytes(),
        )?;
    }

    let n_failed = result.failures.len();
    let n_total = result.axis_values.len() * result.family_labels.len();
    println!("sweep complete: {} points ({n_failed} failed)", n_total);
    Ok(())
}
