//! `sfg design`: emit the drive profile and scheme diagnostics.

use std::path::Path;

use serde_json::json;

use crate::commands::build_design;
use crate::output::{atomic_write, csv_provenance_line, scenario_digest};
use crate::scenario::ResolvedScenario;
use crate::CliError;

pub fn run(scenario: &ResolvedScenario, out_dir: &Path) -> Result<(), CliError> {
    let built = build_design(scenario)?;
    let digest = scenario_digest(&scenario.scenario_bytes);
    let stem = scenario
        .scenario_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());

    if scenario.formats.0 {
        let mut csv = csv_provenance_line(&digest);
        csv.push_str("z_mm,delta_k_per_mm,q_per_mm\n");
        let n = scenario.solver.samples;
        let length = built.profile.length_mm();
        for i in 0..n {
            let z = length * (i as f64) / (n - 1) as f64;
            csv.push_str(&format!(
                "{z:.16e},{:.16e},{:.16e}\n",
                built.profile.delta_k(z),
                built.profile.coupling(z)
            ));
        }
        atomic_write(&out_dir.join(format!("{stem}.profile.csv")), csv.as_bytes())?;
    }

    if scenario.formats.1 {
        let sidecar = json!({
            "toolkit_version": sfg_core::VERSION,
            "scenario_sha256": digest,
            "scheme": scenario.scheme.name(),
            "length_mm": built.profile.length_mm(),
            "diagnostics": built.report,
            "warnings": built.warnings,
        });
        atomic_write(
            &out_dir.join(format!("{stem}.design.json")),
            serde_json::to_string_pretty(&sidecar)
                .map_err(|e| CliError::other(e.to_string()))?
                .as_bytes(),
        )?;
    }

    for w in &built.warnings {
        eprintln!("warning: {w}");
    }
    println!("design written to {}", out_dir.display());
    Ok(())
}
