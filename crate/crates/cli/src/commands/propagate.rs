//! `sfg propagate`: integrate the designed drive and emit the trajectory.

use std::path::Path;

use serde_json::json;

use sfg_core::dynamics::{bloch_vector, efficiency, propagate, ModeState};

use crate::commands::build_design;
use crate::output::{atomic_write, csv_provenance_line, scenario_digest};
use crate::scenario::ResolvedScenario;
use crate::CliError;

pub fn run(scenario: &ResolvedScenario, out_dir: &Path) -> Result<(), CliError> {
    let built = build_design(scenario)?;
    let trajectory = propagate(&built.profile, ModeState::PURE_SIGNAL, &scenario.solver)?;
    let eff = efficiency(&trajectory)?;
    let digest = scenario_digest(&scenario.scenario_bytes);
    let stem = scenario
        .scenario_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());

    if scenario.formats.0 {
        let mut body = Vec::new();
        trajectory.write_csv(&mut body).map_err(|e| CliError::other(e.to_string()))?;
        let mut csv = csv_provenance_line(&digest).into_bytes();
        csv.extend_from_slice(&body);
        atomic_write(&out_dir.join(format!("{stem}.trajectory.csv")), &csv)?;
    }

    if scenario.formats.1 {
        let summary = json!({
            "toolkit_version": sfg_core::VERSION,
            "scenario_sha256": digest,
            "scheme": scenario.scheme.name(),
            "efficiency": eff,
            "norm_drift": trajectory.norm_drift,
            "bloch_start": bloch_vector(trajectory.initial_state()),
            "bloch_end": bloch_vector(trajectory.final_state()),
            "design": built.report,
            "warnings": built.warnings,
        });
        atomic_write(
            &out_dir.join(format!("{stem}.summary.json")),
            serde_json::to_string_pretty(&summary)
                .map_err(|e| CliError::other(e.to_string()))?
                .as_bytes(),
        )?;
    }

    println!("efficiency = {eff:.9}");
    println!("norm_drift = {:.3e}", trajectory.norm_drift);
    Ok(())
}
