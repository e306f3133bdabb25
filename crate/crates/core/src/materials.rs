//! Dispersion and coupling physics.
//!
//! Refractive indices follow a Sellmeier form with a quadratic thermal
//! correction,
//!
//! ```text
//! n(λ)² = A + B / (1 − C λ²) − D λ²          (λ in µm)
//! Δn(λ,T) = n₁(λ)(T − 25) + n₂(λ)(T − 25)²   (T in °C)
//! n₁,₂(λ) = Σ_{m=0..3} a_m / λ^m
//! ```
//!
//! Coefficients ship in a JSON data file and are validated at load time.
//! Canonical units everywhere: z in mm, ΔK and Q in mm⁻¹, wavelengths in µm,
//! temperature in °C, pump intensity in MW/cm².

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) const C_LIGHT: f64 = 299_792_458.0; // m/s
pub(crate) const EPSILON_0: f64 = 8.854_187_812_8e-12; // F/m

/// Reference temperature at which the thermal correction vanishes.
pub const REFERENCE_TEMP_C: f64 = 25.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SellmeierCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalCoefficients {
    /// Coefficients of the linear-in-(T−25) polynomial n₁(λ), units °C⁻¹.
    pub a1: [f64; 4],
    /// Coefficients of the quadratic-in-(T−25) polynomial n₂(λ), units °C⁻².
    pub a2: [f64; 4],
}

/// Extraordinary-axis dispersion model of one crystal.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialModel {
    pub name: String,
    /// Citation for the coefficient values.
    pub source: String,
    pub sellmeier: SellmeierCoefficients,
    pub thermal: ThermalCoefficients,
    /// Supported wavelength band `[min_um, max_um]`.
    pub band: [f64; 2],
}

impl MaterialModel {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let model: MaterialModel = serde_json::from_str(text)
            .map_err(|e| Error::Material(format!("invalid material file: {e}")))?;
        model.validate()?;
        Ok(model)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Material(format!("cannot read material file {}: {e}", path.display()))
        })?;
        Self::from_json_str(&text)
    }

    /// Check band sanity and that n is real and > 1 across the band at 25 °C.
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.band;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Material(format!(
                "band must satisfy 0 < min < max, got [{lo}, {hi}]"
            )));
        }
        for i in 0..=200 {
            let lam = lo + (hi - lo) * (i as f64) / 200.0;
            let n = self.refractive_index(lam, REFERENCE_TEMP_C)?;
            if !(n > 1.0) {
                return Err(Error::Material(format!(
                    "refractive index must be > 1 across the band; n({lam:.4} um) = {n}"
                )));
            }
        }
        Ok(())
    }

    fn check_band(&self, lambda_um: f64) -> Result<()> {
        let [lo, hi] = self.band;
        if !(lambda_um >= lo && lambda_um <= hi) {
            return Err(Error::Domain(format!(
                "wavelength {lambda_um} um outside supported band [{lo}, {hi}] um of {}",
                self.name
            )));
        }
        Ok(())
    }

    /// n(λ) + Δn(λ, T), extraordinary axis.
    pub fn refractive_index(&self, lambda_um: f64, temperature_c: f64) -> Result<f64> {
        self.check_band(lambda_um)?;
        let s = &self.sellmeier;
        let l2 = lambda_um * lambda_um;
        let n2 = s.a + s.b / (1.0 - s.c * l2) - s.d * l2;
        if n2 <= 0.0 {
            return Err(Error::Material(format!(
                "Sellmeier radicand non-positive at {lambda_um} um (n^2 = {n2})"
            )));
        }
        Ok(n2.sqrt() + self.thermal_correction(lambda_um, temperature_c))
    }

    /// Δn(λ, T); exactly zero at T = 25 °C.
    pub fn thermal_correction(&self, lambda_um: f64, temperature_c: f64) -> f64 {
        let dt = temperature_c - REFERENCE_TEMP_C;
        let poly = |a: &[f64; 4]| -> f64 {
            let mut acc = 0.0;
            let mut p = 1.0;
            for coef in a {
                acc += coef / p;
                p *= lambda_um;
            }
            acc
        };
        poly(&self.thermal.a1) * dt + poly(&self.thermal.a2) * dt * dt
    }
}

/// Queryable refractive index, same contract as [`MaterialModel::refractive_index`].
pub fn refractive_index(material: &MaterialModel, lambda_um: f64, temperature_c: f64) -> Result<f64> {
    material.refractive_index(lambda_um, temperature_c)
}

/// k = 2πn/λ, returned in mm⁻¹ for λ in µm.
pub fn wavenumber(n: f64, lambda_um: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::Domain(format!("refractive index must be positive, got {n}")));
    }
    if !(lambda_um > 0.0) {
        return Err(Error::Domain(format!("wavelength must be positive, got {lambda_um} um")));
    }
    Ok(2.0 * std::f64::consts::PI * n / (lambda_um * 1e-3))
}

/// λ₃ = λ₁λ₂/(λ₁+λ₂), from photon-energy conservation ω₁ + ω₂ = ω₃.
pub fn idler_wavelength(lambda1_um: f64, lambda2_um: f64) -> Result<f64> {
    if !(lambda1_um > 0.0 && lambda2_um > 0.0) {
        return Err(Error::Domain(format!(
            "wavelengths must be positive, got ({lambda1_um}, {lambda2_um}) um"
        )));
    }
    Ok(lambda1_um * lambda2_um / (lambda1_um + lambda2_um))
}

/// Contribution 2π/Λ of a poling period to the mismatch, in mm⁻¹ for Λ in µm.
///
/// Sign convention: the poled grating compensates the primary mismatch, so the
/// net mismatch is ΔK(z) = ΔK₀ + δK − 2π/Λ(z).
pub fn poling_wavevector(period_um: f64) -> Result<f64> {
    if !(period_um > 0.0) {
        return Err(Error::Domain(format!("poling period must be positive, got {period_um} um")));
    }
    Ok(2.0 * std::f64::consts::PI / (period_um * 1e-3))
}

/// Signal/pump/idler wavelengths plus pump and crystal coupling parameters.
#[derive(Debug, Clone, Serialize)]
pub struct OpticalSetup {
    pub lambda1_um: f64,
    pub lambda2_um: f64,
    /// Derived idler wavelength.
    pub lambda3_um: f64,
    pub temperature_c: f64,
    pub pump_intensity_mw_cm2: f64,
    /// Second-order susceptibility χ⁽²⁾ in pm/V.
    pub chi2_pm_v: f64,
    pub material: Arc<MaterialModel>,
}

impl OpticalSetup {
    pub fn new(
        lambda1_um: f64,
        lambda2_um: f64,
        temperature_c: f64,
        pump_intensity_mw_cm2: f64,
        chi2_pm_v: f64,
        material: Arc<MaterialModel>,
    ) -> Result<Self> {
        if !(pump_intensity_mw_cm2 >= 0.0) {
            return Err(Error::Domain(format!(
                "pump intensity must be non-negative, got {pump_intensity_mw_cm2} MW/cm^2"
            )));
        }
        if !(chi2_pm_v > 0.0) {
            return Err(Error::Domain(format!(
                "chi2 must be positive, got {chi2_pm_v} pm/V"
            )));
        }
        let lambda3_um = idler_wavelength(lambda1_um, lambda2_um)?;
        Ok(Self {
            lambda1_um,
            lambda2_um,
            lambda3_um,
            temperature_c,
            pump_intensity_mw_cm2,
            chi2_pm_v,
            material,
        })
    }

    /// Same setup at a different signal wavelength (idler rederived).
    pub fn with_lambda1(&self, lambda1_um: f64) -> Result<Self> {
        Self::new(
            lambda1_um,
            self.lambda2_um,
            self.temperature_c,
            self.pump_intensity_mw_cm2,
            self.chi2_pm_v,
            Arc::clone(&self.material),
        )
    }

    pub fn with_temperature(&self, temperature_c: f64) -> Result<Self> {
        Self::new(
            self.lambda1_um,
            self.lambda2_um,
            temperature_c,
            self.pump_intensity_mw_cm2,
            self.chi2_pm_v,
            Arc::clone(&self.material),
        )
    }

    pub fn with_pump_intensity(&self, pump_intensity_mw_cm2: f64) -> Result<Self> {
        Self::new(
            self.lambda1_um,
            self.lambda2_um,
            self.temperature_c,
            pump_intensity_mw_cm2,
            self.chi2_pm_v,
            Arc::clone(&self.material),
        )
    }
}

/// Crystal geometry and poling range.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CrystalSpec {
    pub length_mm: f64,
    pub poling_initial_um: f64,
    pub poling_final_um: f64,
    /// Group-velocity-mismatch offset δK in mm⁻¹ (folded into the sweep offset).
    #[serde(default)]
    pub delta_k_gvm_per_mm: f64,
}

impl CrystalSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_mm > 0.0) {
            return Err(Error::Domain(format!(
                "crystal length must be positive, got {} mm",
                self.length_mm
            )));
        }
        if !(self.poling_initial_um > 0.0 && self.poling_final_um > 0.0) {
            return Err(Error::Domain("poling periods must be positive".into()));
        }
        Ok(())
    }

    /// Peak-to-peak mismatch range |2π/Λ_f − 2π/Λ_i| swept by the poling chirp, mm⁻¹.
    pub fn sweep_span(&self) -> Result<f64> {
        let dk_i = poling_wavevector(self.poling_initial_um)?;
        let dk_f = poling_wavevector(self.poling_final_um)?;
        Ok((dk_f - dk_i).abs())
    }

    /// Sweep slope magnitude α = span / L, in mm⁻².
    pub fn lz_slope(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.sweep_span()? / self.length_mm)
    }
}

/// Primary phase mismatch ΔK₀ = k₁ + k₂ − k₃ in mm⁻¹, extraordinary axis.
pub fn primary_phase_mismatch(setup: &OpticalSetup) -> Result<f64> {
    let m = &setup.material;
    let t = setup.temperature_c;
    let k1 = wavenumber(m.refractive_index(setup.lambda1_um, t)?, setup.lambda1_um)?;
    let k2 = wavenumber(m.refractive_index(setup.lambda2_um, t)?, setup.lambda2_um)?;
    let k3 = wavenumber(m.refractive_index(setup.lambda3_um, t)?, setup.lambda3_um)?;
    Ok(k1 + k2 - k3)
}

/// Coupling coefficient Q₀ in mm⁻¹ implied by the pump intensity,
///
/// ```text
/// Q₀ = sqrt( 32 (χ⁽²⁾)² I_P / (c ε₀ λ₁ λ₃ n₁ n₃) )
/// ```
///
/// the inversion of the constant-coupling pump relation; see
/// [`crate::sweeps::pump_for_constant_coupling`] for the inverse.
pub fn coupling_from_intensity(setup: &OpticalSetup) -> Result<f64> {
    if setup.pump_intensity_mw_cm2 < 0.0 {
        return Err(Error::Domain(format!(
            "pump intensity must be non-negative, got {} MW/cm^2",
            setup.pump_intensity_mw_cm2
        )));
    }
    let m = &setup.material;
    let n1 = m.refractive_index(setup.lambda1_um, setup.temperature_c)?;
    let n3 = m.refractive_index(setup.lambda3_um, setup.temperature_c)?;
    let chi = setup.chi2_pm_v * 1e-12; // m/V
    let intensity = setup.pump_intensity_mw_cm2 * 1e10; // W/m^2
    let l1 = setup.lambda1_um * 1e-6; // m
    let l3 = setup.lambda3_um * 1e-6; // m
    let q_sq = 32.0 * chi * chi * intensity / (C_LIGHT * EPSILON_0 * l1 * l3 * n1 * n3);
    Ok(q_sq.sqrt() * 1e-3) // 1/m -> 1/mm
}
