//! Batch efficiency studies: conversion efficiency versus signal wavelength or
//! crystal temperature, across pump-intensity / length / c₁ families.
//!
//! With `design_frozen` (the default) each family's drive is designed once at
//! the baseline setup and then held fixed while the axis varies — the model of
//! a fabricated crystal exposed to perturbations. The perturbation enters as a
//! constant mismatch shift ΔK₀(x) − ΔK₀(baseline) plus a coupling rescale
//! from the wavelength/temperature dependence of the coupling coefficient at
//! fixed pump intensity.

use std::io::Write;

use serde::Serialize;

use crate::dynamics::{
    efficiency, max_adiabaticity, propagate, DriveProfile, ModeState, SolverConfig,
};
use crate::error::{Error, Result};
use crate::materials::{
    coupling_from_intensity, primary_phase_mismatch, CrystalSpec, OpticalSetup, C_LIGHT, EPSILON_0,
};
use crate::profiles::{design_adiabatic, design_cd, solve_zeta, Anchor};

/// Pump intensity (MW/cm²) that realizes a coupling `q0` at signal wavelength
/// `lambda1_um`:
///
/// ```text
/// I₂(λ₁) = Q₀² c ε₀ λ₁ λ₃ n₁ n₃ / (32 (χ⁽²⁾)²)
/// ```
///
/// the exact inverse of [`coupling_from_intensity`].
pub fn pump_for_constant_coupling(
    q0_per_mm: f64,
    lambda1_um: f64,
    setup: &OpticalSetup,
) -> Result<f64> {
    if q0_per_mm < 0.0 {
        return Err(Error::Domain(format!("coupling must be non-negative, got {q0_per_mm}")));
    }
    let at = setup.with_lambda1(lambda1_um)?;
    let n1 = at.material.refractive_index(at.lambda1_um, at.temperature_c)?;
    let n3 = at.material.refractive_index(at.lambda3_um, at.temperature_c)?;
    let chi = at.chi2_pm_v * 1e-12;
    let q_m = q0_per_mm * 1e3; // 1/mm -> 1/m
    let intensity = q_m * q_m * C_LIGHT * EPSILON_0 * (at.lambda1_um * 1e-6)
        * (at.lambda3_um * 1e-6)
        * n1
        * n3
        / (32.0 * chi * chi);
    Ok(intensity / 1e10) // W/m^2 -> MW/cm^2
}

/// ΔK₀ versus temperature table plus the coefficients of the exact quadratic
/// in (T − 25 °C).
#[derive(Debug, Clone, Serialize)]
pub struct TemperatureReport {
    pub rows: Vec<(f64, f64)>,
    /// ΔK₀(T) = quad[0] + quad[1]·(T−25) + quad[2]·(T−25)².
    pub quad: [f64; 3],
}

pub fn temperature_detuning_report(
    setup: &OpticalSetup,
    t_range: [f64; 2],
    points: usize,
) -> Result<TemperatureReport> {
    let [lo, hi] = t_range;
    if !(lo < hi) || points < 2 {
        return Err(Error::Contract(format!(
            "temperature range needs lo < hi and at least 2 points, got [{lo}, {hi}] x{points}"
        )));
    }
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let t = lo + (hi - lo) * (i as f64) / (points - 1) as f64;
        rows.push((t, primary_phase_mismatch(&setup.with_temperature(t)?)?));
    }
    // the thermal correction is quadratic in (T-25), so three samples fix it
    let f = |t: f64| -> Result<f64> { primary_phase_mismatch(&setup.with_temperature(t)?) };
    let (t0, t1, t2) = (lo, 0.5 * (lo + hi), hi);
    let (y0, y1, y2) = (f(t0)?, f(t1)?, f(t2)?);
    let (x0, x1, x2) = (t0 - 25.0, t1 - 25.0, t2 - 25.0);
    let l0 = y0 / ((x0 - x1) * (x0 - x2));
    let l1 = y1 / ((x1 - x0) * (x1 - x2));
    let l2 = y2 / ((x2 - x0) * (x2 - x1));
    let quad = [
        l0 * x1 * x2 + l1 * x0 * x2 + l2 * x0 * x1,
        -(l0 * (x1 + x2) + l1 * (x0 + x2) + l2 * (x0 + x1)),
        l0 + l1 + l2,
    ];
    Ok(TemperatureReport { rows, quad })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SignalWavelength,
    Temperature,
}

impl SweepAxis {
    pub fn column_name(&self) -> &'static str {
        match self {
            SweepAxis::SignalWavelength => "lambda1_um",
            SweepAxis::Temperature => "temperature_c",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case", tag = "scheme")]
pub enum SchemeConfig {
    Adiabatic,
    Cd,
    LzOptimal { coeffs: Vec<f64> },
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyVariant {
    PumpIntensity(f64),
    Length(f64),
    C1(f64),
}

impl FamilyVariant {
    pub fn label(&self) -> String {
        match self {
            FamilyVariant::PumpIntensity(v) => format!("ip_{v}"),
            FamilyVariant::Length(v) => format!("L_{v}mm"),
            FamilyVariant::C1(v) => format!("c1_{v}"),
        }
    }
}

#[derive(Clone, Serialize)]
pub struct SweepSpec {
    pub scheme: SchemeConfig,
    pub axis: SweepAxis,
    pub axis_range: [f64; 2],
    pub points: usize,
    pub setup: OpticalSetup,
    pub crystal: CrystalSpec,
    /// Empty means a single family at the baseline setup.
    pub families: Vec<FamilyVariant>,
    pub design_frozen: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PointDiagnostics {
    pub max_c_ad: f64,
    pub norm_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointFailure {
    pub family: String,
    pub axis_value: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub toolkit_version: String,
    pub scenario_digest: Option<String>,
}

#[derive(Clone, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub family_labels: Vec<String>,
    /// `efficiency[family][point]`, `None` where the point failed.
    pub efficiency: Vec<Vec<Option<f64>>>,
    pub diagnostics: Vec<Vec<Option<PointDiagnostics>>>,
    pub failures: Vec<PointFailure>,
    pub provenance: Provenance,
    pub spec: SweepSpec,
}

impl SweepResult {
    /// CSV with the axis column plus one efficiency column per family.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "{}", self.axis.column_name())?;
        for label in &self.family_labels {
            write!(w, ",{label}")?;
        }
        writeln!(w)?;
        for (i, x) in self.axis_values.iter().enumerate() {
            write!(w, "{x:.16e}")?;
            for fam in &self.efficiency {
                match fam[i] {
                    Some(v) => write!(w, ",{v:.16e}")?,
                    None => write!(w, ",NaN")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

struct Family {
    label: String,
    profile: DriveProfile,
    /// Setup that defines the perturbation reference (baseline wavelengths and
    /// temperature; the family's pump intensity where that applies).
    base_setup: OpticalSetup,
    variant: Option<FamilyVariant>,
}

fn build_family(spec: &SweepSpec, variant: Option<FamilyVariant>) -> Result<Family> {
    build_family_at(spec, variant, &spec.setup)
}

fn build_family_at(
    spec: &SweepSpec,
    variant: Option<FamilyVariant>,
    setup: &OpticalSetup,
) -> Result<Family> {
    let label = variant.map_or_else(|| "baseline".to_string(), |v| v.label());
    let (profile, base_setup) = match (&spec.scheme, variant) {
        (SchemeConfig::Adiabatic, None) => {
            (design_adiabatic(&spec.crystal, setup)?.0, setup.clone())
        }
        (SchemeConfig::Adiabatic, Some(FamilyVariant::PumpIntensity(ip))) => {
            let s = setup.with_pump_intensity(ip)?;
            (design_adiabatic(&spec.crystal, &s)?.0, s)
        }
        (SchemeConfig::Adiabatic, Some(FamilyVariant::Length(l))) => {
            // a shorter crystal diced from the fabricated baseline poling
            let (profile, _d) = design_adiabatic(&spec.crystal, setup)?;
            (profile.truncated(l)?, setup.clone())
        }
        (SchemeConfig::Cd, None) => {
            let (_p, base) = design_adiabatic(&spec.crystal, setup)?;
            (design_cd(base)?.0, setup.clone())
        }
        (SchemeConfig::Cd, Some(FamilyVariant::PumpIntensity(ip))) => {
            let s = setup.with_pump_intensity(ip)?;
            let (_p, base) = design_adiabatic(&spec.crystal, &s)?;
            (design_cd(base)?.0, s)
        }
        (SchemeConfig::Cd, Some(FamilyVariant::Length(l))) => {
            // the full sweep compressed into the shorter crystal
            let mut crystal = spec.crystal;
            crystal.length_mm = l;
            let (_p, base) = design_adiabatic(&crystal, setup)?;
            (design_cd(base)?.0, setup.clone())
        }
        (SchemeConfig::LzOptimal { coeffs }, variant) => {
            let (coeffs, setup_f): (Vec<f64>, OpticalSetup) = match variant {
                None => (coeffs.clone(), setup.clone()),
                Some(FamilyVariant::C1(c1)) => (vec![c1], setup.clone()),
                Some(FamilyVariant::PumpIntensity(ip)) => {
                    (coeffs.clone(), setup.with_pump_intensity(ip)?)
                }
                Some(FamilyVariant::Length(_)) => (coeffs.clone(), setup.clone()),
            };
            let design = match variant {
                Some(FamilyVariant::Length(l)) => solve_zeta(&coeffs, Anchor::Length(l))?,
                _ => {
                    let q0 = coupling_from_intensity(&setup_f)?;
                    if !(q0 > 0.0) {
                        return Err(Error::Design(
                            "constant-coupling design needs a positive pump intensity".into(),
                        ));
                    }
                    solve_zeta(&coeffs, Anchor::Coupling(q0))?
                }
            };
            (design.profile()?, setup_f)
        }
        (_, Some(FamilyVariant::C1(_))) => {
            return Err(Error::Contract(
                "c1 family variants apply to the lz_optimal scheme only".into(),
            ))
        }
    };
    Ok(Family { label, profile, base_setup, variant })
}

/// Mismatch shift and coupling rescale of a fabricated design at one axis
/// point. The rescale is the wavelength/temperature dependence of the
/// coupling coefficient at fixed pump intensity, which is independent of the
/// intensity itself.
fn perturbation(base: &OpticalSetup, axis: SweepAxis, x: f64) -> Result<(f64, f64)> {
    let perturbed = match axis {
        SweepAxis::SignalWavelength => base.with_lambda1(x)?,
        SweepAxis::Temperature => base.with_temperature(x)?,
    };
    let shift = primary_phase_mismatch(&perturbed)? - primary_phase_mismatch(base)?;
    let weight = |s: &OpticalSetup| -> Result<f64> {
        let n1 = s.material.refractive_index(s.lambda1_um, s.temperature_c)?;
        let n3 = s.material.refractive_index(s.lambda3_um, s.temperature_c)?;
        Ok(s.lambda1_um * s.lambda3_um * n1 * n3)
    };
    let scale = (weight(base)? / weight(&perturbed)?).sqrt();
    Ok((shift, scale))
}

fn evaluate_point(
    spec: &SweepSpec,
    family: &Family,
    x: f64,
    solver: &SolverConfig,
) -> Result<(f64, PointDiagnostics)> {
    let profile = if spec.design_frozen {
        let (shift, scale) = perturbation(&family.base_setup, spec.axis, x)?;
        family.profile.shifted_scaled(shift, scale)
    } else {
        let setup = match spec.axis {
            SweepAxis::SignalWavelength => family.base_setup.with_lambda1(x)?,
            SweepAxis::Temperature => family.base_setup.with_temperature(x)?,
        };
        build_family_at(spec, family.variant, &setup)?.profile
    };
    let trajectory = propagate(&profile, ModeState::PURE_SIGNAL, solver)?;
    let eff = efficiency(&trajectory)?;
    let diag = PointDiagnostics {
        max_c_ad: max_adiabaticity(&profile, 201).unwrap_or(f64::NAN),
        norm_drift: trajectory.norm_drift,
    };
    Ok((eff, diag))
}

/// Run the sweep on a worker pool. `workers = 0` uses the rayon default; the
/// output is identical for any worker count (results are gathered by index).
pub fn run_sweep(spec: &SweepSpec, solver: &SolverConfig, workers: usize) -> Result<SweepResult> {
    solver.validate()?;
    spec.crystal.validate()?;
    let [lo, hi] = spec.axis_range;
    if !(lo < hi) {
        return Err(Error::Contract(format!("axis range needs lo < hi, got [{lo}, {hi}]")));
    }
    if spec.points < 2 {
        return Err(Error::Contract("axis needs at least 2 points".into()));
    }

    let variants: Vec<Option<FamilyVariant>> = if spec.families.is_empty() {
        vec![None]
    } else {
        spec.families.iter().copied().map(Some).collect()
    };
    let families: Vec<Family> =
        variants.iter().map(|v| build_family(spec, *v)).collect::<Result<_>>()?;
    {
        let mut labels: Vec<&str> = families.iter().map(|f| f.label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != families.len() {
            return Err(Error::Contract("family labels must be unique".into()));
        }
    }

    let axis_values: Vec<f64> = (0..spec.points)
        .map(|i| lo + (hi - lo) * (i as f64) / (spec.points - 1) as f64)
        .collect();

    let n_fam = families.len();
    let n_pts = axis_values.len();
    let jobs: Vec<(usize, usize)> =
        (0..n_fam).flat_map(|f| (0..n_pts).map(move |p| (f, p))).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Contract(format!("cannot build worker pool: {e}")))?;
    let outcomes: Vec<Result<(f64, PointDiagnostics)>> = pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|&(f, p)| evaluate_point(spec, &families[f], axis_values[p], solver))
            .collect()
    });

    let mut efficiency = vec![vec![None; n_pts]; n_fam];
    let mut diagnostics = vec![vec![None; n_pts]; n_fam];
    let mut failures = Vec::new();
    for (&(f, p), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok((eff, diag)) => {
                efficiency[f][p] = Some(eff);
                diagnostics[f][p] = Some(diag);
            }
            Err(e) => failures.push(PointFailure {
                family: families[f].label.clone(),
                axis_value: axis_values[p],
                reason: e.to_string(),
            }),
        }
    }

    Ok(SweepResult {
        axis: spec.axis,
        axis_values,
        family_labels: families.into_iter().map(|f| f.label).collect(),
        efficiency,
        diagnostics,
        failures,
        provenance: Provenance {
            toolkit_version: crate::VERSION.to_string(),
            scenario_digest: None,
        },
        spec: spec.clone(),
    })
}
