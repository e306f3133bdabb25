//! Scenario files: a single JSON document with explicit unit suffixes on every
//! physical quantity. Parse errors surface with line/column; semantic errors
//! name the offending field path.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use sfg_core::dynamics::SolverConfig;
use sfg_core::materials::{CrystalSpec, MaterialModel, OpticalSetup};
use sfg_core::sweeps::{FamilyVariant, SweepAxis};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub material_file: PathBuf,
    pub setup: SetupBlock,
    pub crystal: CrystalSpec,
    pub scheme: SchemeBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupBlock {
    pub lambda1_um: f64,
    pub lambda2_um: f64,
    pub temperature_c: f64,
    pub pump_intensity_mw_cm2: f64,
    pub chi2_pm_v: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeBlock {
    Adiabatic,
    Cd,
    LzOptimal {
        coeffs: Vec<f64>,
        #[serde(default)]
        q0_per_mm: Option<f64>,
        #[serde(default)]
        length_mm: Option<f64>,
    },
}

impl SchemeBlock {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeBlock::Adiabatic => "adiabatic",
            SchemeBlock::Cd => "cd",
            SchemeBlock::LzOptimal { .. } => "lz_optimal",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_rel_tol() -> f64 {
    1e-9
}
fn default_abs_tol() -> f64 {
    1e-12
}
fn default_samples() -> usize {
    1001
}

impl Default for SolverBlock {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-12, samples: 1001 }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Subset of {"csv", "json"}; both by default.
    #[serde(default)]
    pub formats: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub axis: AxisSpec,
    #[serde(default)]
    pub range_lo: Option<f64>,
    #[serde(default)]
    pub range_hi: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub families: Vec<FamilySpec>,
    #[serde(default = "default_true")]
    pub design_frozen: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisSpec {
    SignalWavelength,
    Temperature,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum FamilySpec {
    Pump { pump_intensity_mw_cm2: f64 },
    Length { length_mm: f64 },
    C1 { c1: f64 },
}

/// Scenario resolved against the filesystem and validated into core objects.
pub struct ResolvedScenario {
    pub scenario_path: PathBuf,
    pub scenario_bytes: Vec<u8>,
    pub setup: OpticalSetup,
    pub crystal: CrystalSpec,
    pub scheme: SchemeBlock,
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    pub formats: (bool, bool), // (csv, json)
    pub sweep: Option<ResolvedSweep>,
}

pub struct ResolvedSweep {
    pub axis: SweepAxis,
    pub range: [f64; 2],
    pub points: usize,
    pub families: Vec<FamilyVariant>,
    pub design_frozen: bool,
}

fn invalid(field: &str, msg: String) -> CliError {
    CliError::validation(format!("{field}: {msg}"))
}

pub fn load(path: &Path) -> Result<ResolvedScenario, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::validation(format!("cannot read scenario {}: {e}", path.display())))?;
    let scenario: Scenario = serde_json::from_slice(&bytes).map_err(|e| {
        CliError::validation(format!(
            "scenario {}: invalid JSON at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;

    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    let material_path = if scenario.material_file.is_absolute() {
        scenario.material_file.clone()
    } else {
        base_dir.join(&scenario.material_file)
    };
    if !material_path.exists() {
        return Err(invalid(
            "material_file",
            format!("{} does not exist", material_path.display()),
        ));
    }
    let material = Arc::new(MaterialModel::from_json_file(&material_path)?);

    let s = &scenario.setup;
    if !(s.lambda1_um > 0.0) {
        return Err(invalid("setup.lambda1_um", "must be positive".into()));
    }
    if !(s.lambda2_um > 0.0) {
        return Err(invalid("setup.lambda2_um", "must be positive".into()));
    }
    if !(s.pump_intensity_mw_cm2 >= 0.0) {
        return Err(invalid("setup.pump_intensity_mw_cm2", "must be non-negative".into()));
    }
    if !(s.chi2_pm_v > 0.0) {
        return Err(invalid("setup.chi2_pm_v", "must be positive".into()));
    }
    let setup = OpticalSetup::new(
        s.lambda1_um,
        s.lambda2_um,
        s.temperature_c,
        s.pump_intensity_mw_cm2,
        s.chi2_pm_v,
        material,
    )
    .map_err(|e| invalid("setup", e.to_string()))?;

    scenario.crystal.validate().map_err(|e| invalid("crystal", e.to_string()))?;

    if let SchemeBlock::LzOptimal { coeffs, q0_per_mm, length_mm } = &scenario.scheme {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("scheme.coeffs", "coefficients must be finite".into()));
        }
        if let Some(q0) = q0_per_mm {
            if !(*q0 > 0.0) {
                return Err(invalid("scheme.q0_per_mm", "must be positive".into()));
            }
        }
        if let Some(l) = length_mm {
            if !(*l > 0.0) {
                return Err(invalid("scheme.length_mm", "must be positive".into()));
            }
        }
    }

    let solver = SolverConfig {
        rel_tol: scenario.solver.rel_tol,
        abs_tol: scenario.solver.abs_tol,
        samples: scenario.solver.samples,
    };
    solver.validate().map_err(|e| invalid("solver", e.to_string()))?;
    if solver.samples < 500 {
        return Err(invalid("solver.samples", "at least 500 samples are required".into()));
    }

    let formats = match &scenario.output.formats {
        None => (true, true),
        Some(list) => {
            for f in list {
                if f != "csv" && f != "json" {
                    return Err(invalid(
                        "output.formats",
                        format!("unknown format {f:?}; expected \"csv\" or \"json\""),
                    ));
                }
            }
            (list.iter().any(|f| f == "csv"), list.iter().any(|f| f == "json"))
        }
    };

    let sweep = match &scenario.sweep {
        None => None,
        Some(block) => {
            let axis = match block.axis {
                AxisSpec::SignalWavelength => SweepAxis::SignalWavelength,
                AxisSpec::Temperature => SweepAxis::Temperature,
            };
            let (default_lo, default_hi, default_pts) = match axis {
                SweepAxis::SignalWavelength => (1.40, 1.70, 121),
                SweepAxis::Temperature => (0.0, 100.0, 101),
            };
            let lo = block.range_lo.unwrap_or(default_lo);
            let hi = block.range_hi.unwrap_or(default_hi);
            let points = block.points.unwrap_or(default_pts);
            if !(lo < hi) {
                return Err(invalid("sweep.range_lo/range_hi", format!("need lo < hi, got [{lo}, {hi}]")));
            }
            if points < 2 {
                return Err(invalid("sweep.points", "need at least 2 points".into()));
            }
            let families = block
                .families
                .iter()
                .map(|f| match f {
                    FamilySpec::Pump { pump_intensity_mw_cm2 } => {
                        FamilyVariant::PumpIntensity(*pump_intensity_mw_cm2)
                    }
                    FamilySpec::Length { length_mm } => FamilyVariant::Length(*length_mm),
                    FamilySpec::C1 { c1 } => FamilyVariant::C1(*c1),
                })
                .collect();
            Some(ResolvedSweep {
                axis,
                range: [lo, hi],
                points,
                families,
                design_frozen: block.design_frozen,
            })
        }
    };

    Ok(ResolvedScenario {
        scenario_path: path.to_path_buf(),
        scenario_bytes: bytes,
        setup,
        crystal: scenario.crystal,
        scheme: scenario.scheme,
        solver,
        output_dir: scenario.output.dir.clone().unwrap_or_else(|| PathBuf::from("out")),
        formats,
        sweep,
    })
}
