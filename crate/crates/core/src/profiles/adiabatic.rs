//! Linear Landau–Zener sweep fixed by the poling chirp.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dynamics::{DriveProfile, ProfileMetadata};
use crate::error::Result;
use crate::materials::{coupling_from_intensity, CrystalSpec, OpticalSetup};

/// Linear-sweep design ΔK(z) = δK + Δ₀ − αz with constant coupling Q₀.
///
/// The sweep offset is auto-centered: the poling chirp fixes the swept range
/// (peak to peak |2π/Λ_f − 2π/Λ_i|), and Δ₀ is half of it, so with δK = 0 the
/// mismatch runs from +Δ₀ at z = 0 to −Δ₀ at z = L and crosses zero
/// mid-crystal.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AdiabaticLzDesign {
    /// Half sweep span Δ₀ (mm⁻¹).
    pub delta0: f64,
    /// Sweep slope α = 2Δ₀/L (mm⁻²).
    pub alpha: f64,
    /// Constant coupling Q₀ (mm⁻¹).
    pub q0: f64,
    pub length_mm: f64,
    /// Group-velocity-mismatch offset δK folded into the sweep (mm⁻¹).
    #[serde(default)]
    pub gvm_offset: f64,
}

impl AdiabaticLzDesign {
    pub fn delta_k(&self, z: f64) -> f64 {
        self.gvm_offset + self.delta0 - self.alpha * z
    }

    /// True when the mismatch changes sign inside the crystal (an avoided
    /// crossing exists).
    pub fn sweep_crosses_zero(&self) -> bool {
        self.delta_k(0.0) * self.delta_k(self.length_mm) < 0.0
    }

    pub fn profile(&self) -> Result<DriveProfile> {
        let d = *self;
        DriveProfile::new(
            Arc::new(move |z| d.delta_k(z)),
            Arc::new(move |_z| d.q0),
            Some(Arc::new(move |_z| -d.alpha)),
            d.length_mm,
            ProfileMetadata {
                scheme: "adiabatic".into(),
                params: json!({
                    "delta0_per_mm": d.delta0,
                    "alpha_per_mm2": d.alpha,
                    "q0_per_mm": d.q0,
                    "length_mm": d.length_mm,
                    "gvm_offset_per_mm": d.gvm_offset,
                }),
            },
        )
    }
}

/// Build the linear sweep implied by a chirped poling: the period runs from
/// Λ_i to Λ_f over the crystal, the mismatch range is |2π/Λ_f − 2π/Λ_i|, and
/// the coupling comes from the pump intensity.
pub fn design_adiabatic(
    crystal: &CrystalSpec,
    setup: &OpticalSetup,
) -> Result<(DriveProfile, AdiabaticLzDesign)> {
    crystal.validate()?;
    let span = crystal.sweep_span()?;
    let design = AdiabaticLzDesign {
        delta0: span / 2.0,
        alpha: span / crystal.length_mm,
        q0: coupling_from_intensity(setup)?,
        length_mm: crystal.length_mm,
        gvm_offset: crystal.delta_k_gvm_per_mm,
    };
    Ok((design.profile()?, design))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    use crate::materials::MaterialModel;

    fn paper_crystal(length_mm: f64) -> CrystalSpec {
        CrystalSpec {
            length_mm,
            poling_initial_um: 16.2,
            poling_final_um: 14.6,
            delta_k_gvm_per_mm: 0.0,
        }
    }

    fn paper_setup(intensity: f64) -> OpticalSetup {
        let m = MaterialModel::from_json_str(include_str!("../../../../data/ktp_z.json")).unwrap();
        OpticalSetup::new(1.535, 1.064, 25.0, intensity, 32.0, Arc::new(m)).unwrap()
    }

    #[test]
    fn paper_poling_range_gives_expected_slope() {
        let (_p, d) = design_adiabatic(&paper_crystal(20.0), &paper_setup(360.0)).unwrap();
        // (430.355 - 387.851) / 20
        assert_relative_eq!(d.alpha, 2.125210656918, max_relative = 1e-9);
        assert_relative_eq!(2.0 * d.delta0, 42.504213138370, max_relative = 1e-9);
        assert_relative_eq!(d.alpha, 2.0 * d.delta0 / d.length_mm, max_relative = 1e-12);
        assert!(d.sweep_crosses_zero());
    }

    #[test]
    fn sweep_is_symmetric() {
        let (p, d) = design_adiabatic(&paper_crystal(20.0), &paper_setup(360.0)).unwrap();
        assert_relative_eq!(p.delta_k(0.0), d.delta0, max_relative = 1e-12);
        assert_relative_eq!(p.delta_k(20.0), -d.delta0, max_relative = 1e-12);
        assert_relative_eq!(p.coupling(10.0), d.q0);
    }

    #[test]
    fn unchirped_poling_has_no_crossing() {
        let crystal = CrystalSpec {
            length_mm: 20.0,
            poling_initial_um: 15.0,
            poling_final_um: 15.0,
            delta_k_gvm_per_mm: 0.0,
        };
        let (p, d) = design_adiabatic(&crystal, &paper_setup(360.0)).unwrap();
        assert_eq!(d.alpha, 0.0);
        assert!(!d.sweep_crosses_zero());
        assert_eq!(p.delta_k(3.0), 0.0);
    }

    #[test]
    fn gvm_offset_shifts_the_sweep() {
        let mut crystal = paper_crystal(20.0);
        crystal.delta_k_gvm_per_mm = 1.5;
        let (p, _d) = design_adiabatic(&crystal, &paper_setup(360.0)).unwrap();
        assert_relative_eq!(p.delta_k(0.0), 21.252106569185 + 1.5, max_relative = 1e-9);
    }
}
