//! Subcommand implementations.

pub mod design;
pub mod material;
pub mod propagate;
pub mod sweep;

use serde_json::{json, Value};

use sfg_core::dynamics::{max_adiabaticity, DriveProfile};
use sfg_core::materials::coupling_from_intensity;
use sfg_core::profiles::{design_adiabatic, design_cd, design_lz_optimal, solve_zeta, Anchor};
use sfg_core::sweeps::pump_for_constant_coupling;

use crate::scenario::{ResolvedScenario, SchemeBlock};
use crate::CliError;

/// Pump intensity above which the crystal is at risk.
const DAMAGE_THRESHOLD_MW_CM2: f64 = 500.0;

pub struct BuiltDesign {
    pub profile: DriveProfile,
    /// Scheme diagnostics for the metadata sidecar.
    pub report: Value,
    pub warnings: Vec<String>,
}

pub fn build_design(scenario: &ResolvedScenario) -> Result<BuiltDesign, CliError> {
    let mut warnings = Vec::new();
    let (profile, report) = match &scenario.scheme {
        SchemeBlock::Adiabatic => {
            let (profile, design) = design_adiabatic(&scenario.crystal, &scenario.setup)?;
            if !design.sweep_crosses_zero() {
                warnings.push("no avoided crossing inside crystal".into());
            }
            let max_c_ad = max_adiabaticity(&profile, 2001)?;
            (
                profile,
                json!({
                    "scheme": "adiabatic",
                    "design": design,
                    "max_c_ad": max_c_ad,
                }),
            )
        }
        SchemeBlock::Cd => {
            let (_bare, base) = design_adiabatic(&scenario.crystal, &scenario.setup)?;
            if !base.sweep_crosses_zero() {
                warnings.push("no avoided crossing inside crystal".into());
            }
            let (profile, cd) = design_cd(base)?;
            let max_q_eff = cd.max_q_eff();
            let required_intensity = pump_for_constant_coupling(
                max_q_eff,
                scenario.setup.lambda1_um,
                &scenario.setup,
            )?;
            if required_intensity > DAMAGE_THRESHOLD_MW_CM2 {
                warnings.push(format!(
                    "peak effective coupling needs {required_intensity:.1} MW/cm^2, above the \
                     damage threshold of {DAMAGE_THRESHOLD_MW_CM2} MW/cm^2"
                ));
            }
            let max_c_ad = max_adiabaticity(&profile, 2001)?;
            (
                profile,
                json!({
                    "scheme": "cd",
                    "design": cd,
                    "max_q_eff_per_mm": max_q_eff,
                    "q_eff_required_intensity_mw_cm2": required_intensity,
                    "damage_threshold_mw_cm2": DAMAGE_THRESHOLD_MW_CM2,
                    "exceeds_damage_threshold": required_intensity > DAMAGE_THRESHOLD_MW_CM2,
                    "max_c_ad": max_c_ad,
                }),
            )
        }
        SchemeBlock::LzOptimal { coeffs, q0_per_mm, length_mm } => {
            let (profile, design) = match (q0_per_mm, length_mm) {
                (Some(q0), Some(length)) => design_lz_optimal(coeffs, *q0, *length)?,
                (Some(q0), None) => {
                    let d = solve_zeta(coeffs, Anchor::Coupling(*q0))?;
                    (d.profile()?, d)
                }
                (None, Some(length)) => {
                    let d = solve_zeta(coeffs, Anchor::Length(*length))?;
                    (d.profile()?, d)
                }
                (None, None) => {
                    // coupling fixed by the pump intensity of the setup
                    let q0 = coupling_from_intensity(&scenario.setup)?;
                    if !(q0 > 0.0) {
                        return Err(CliError::validation(
                            "scheme: lz_optimal needs q0_per_mm, length_mm, or a positive pump \
                             intensity"
                                .into(),
                        ));
                    }
                    let d = solve_zeta(coeffs, Anchor::Coupling(q0))?;
                    (d.profile()?, d)
                }
            };
            let (res_a, res_b) = design.invariance_residuals(101);
            let implied_pump = pump_for_constant_coupling(
                design.q0,
                scenario.setup.lambda1_um,
                &scenario.setup,
            )?;
            (
                profile,
                json!({
                    "scheme": "lz_optimal",
                    "coeffs": design.coeffs(),
                    "q0_per_mm": design.q0,
                    "length_mm": design.length_mm,
                    "bound_value": design.bound_value,
                    "implied_pump_intensity_mw_cm2": implied_pump,
                    "invariance_residuals": { "zeta": res_a, "beta": res_b },
                }),
            )
        }
    };
    Ok(BuiltDesign { profile, report, warnings })
}
