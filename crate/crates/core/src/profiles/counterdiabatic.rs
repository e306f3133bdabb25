//! Counter-diabatic correction of the linear sweep.
//!
//! The correction term (ϑ̇/2)σ_y cancels non-adiabatic transitions exactly, so
//! the state tracks the instantaneous eigenstates of the bare Hamiltonian at
//! any crystal length. A z-dependent rotation folds the two-field drive
//! (ΔK, Q₀, ϑ̇/2) into the single effective pair
//!
//! ```text
//! Q_eff = sqrt(Q₀² + ϑ̇²/4),   ΔK_eff = ΔK − φ̇,   φ = atan(ϑ̇ / 2Q₀),
//! ```
//!
//! which leaves populations untouched.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::json;

use crate::dynamics::{
    propagate_complex_coupling, DriveProfile, ModeState, ProfileMetadata, SolverConfig, Trajectory,
};
use crate::error::{Error, Result};
use crate::profiles::AdiabaticLzDesign;

/// Mixing angle ϑ = atan2(2q, ΔK), continuous in (0, π) along a sweep from
/// ΔK = +∞ to −∞ for positive coupling.
pub fn mixing_angle(delta_k: f64, q: f64) -> Result<f64> {
    if delta_k == 0.0 && q == 0.0 {
        return Err(Error::Domain(
            "mixing angle undefined where coupling and mismatch both vanish".into(),
        ));
    }
    Ok(f64::atan2(2.0 * q, delta_k))
}

/// Counter-diabatic drive derived from a linear-sweep base design.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CdDesign {
    pub base: AdiabaticLzDesign,
}

impl CdDesign {
    pub fn delta_k(&self, z: f64) -> f64 {
        self.base.delta_k(z)
    }

    pub fn theta(&self, z: f64) -> f64 {
        f64::atan2(2.0 * self.base.q0, self.delta_k(z))
    }

    /// ϑ̇ = 2Q₀α / (ΔK² + 4Q₀²); the counter-diabatic term is ϑ̇/2.
    pub fn theta_dot(&self, z: f64) -> f64 {
        let dk = self.delta_k(z);
        2.0 * self.base.q0 * self.base.alpha / (dk * dk + 4.0 * self.base.q0 * self.base.q0)
    }

    /// Rotation angle of the multiple-Schrödinger-picture transformation.
    pub fn phi(&self, z: f64) -> f64 {
        (self.theta_dot(z) / (2.0 * self.base.q0)).atan()
    }

    pub fn phi_dot(&self, z: f64) -> f64 {
        let dk = self.delta_k(z);
        let alpha = self.base.alpha;
        let d = dk * dk + 4.0 * self.base.q0 * self.base.q0;
        2.0 * alpha * alpha * dk / (d * d + alpha * alpha)
    }

    fn phi_ddot(&self, z: f64) -> f64 {
        let dk = self.delta_k(z);
        let alpha = self.base.alpha;
        let d = dk * dk + 4.0 * self.base.q0 * self.base.q0;
        let da = d * d + alpha * alpha;
        2.0 * alpha.powi(3) * (4.0 * dk * dk * d - d * d - alpha * alpha) / (da * da)
    }

    pub fn q_eff(&self, z: f64) -> f64 {
        let td = self.theta_dot(z);
        (self.base.q0 * self.base.q0 + 0.25 * td * td).sqrt()
    }

    pub fn delta_k_eff(&self, z: f64) -> f64 {
        self.delta_k(z) - self.phi_dot(z)
    }

    /// Largest effective coupling along the crystal; the maximum sits where
    /// |ΔK| is smallest.
    pub fn max_q_eff(&self) -> f64 {
        let b = &self.base;
        let z_star = if b.alpha != 0.0 {
            ((b.gvm_offset + b.delta0) / b.alpha).clamp(0.0, b.length_mm)
        } else {
            0.0
        };
        self.q_eff(z_star).max(self.q_eff(0.0)).max(self.q_eff(b.length_mm))
    }

    /// Effective single-field drive (ΔK_eff, Q_eff).
    pub fn profile(&self) -> Result<DriveProfile> {
        let d = *self;
        DriveProfile::new(
            Arc::new(move |z| d.delta_k_eff(z)),
            Arc::new(move |z| d.q_eff(z)),
            Some(Arc::new(move |z| -d.base.alpha - d.phi_ddot(z))),
            d.base.length_mm,
            ProfileMetadata {
                scheme: "cd".into(),
                params: json!({
                    "delta0_per_mm": d.base.delta0,
                    "alpha_per_mm2": d.base.alpha,
                    "q0_per_mm": d.base.q0,
                    "length_mm": d.base.length_mm,
                    "gvm_offset_per_mm": d.base.gvm_offset,
                    "max_q_eff_per_mm": d.max_q_eff(),
                }),
            },
        )
    }

    /// Propagate under the explicit two-field form ΔK/2·σ_z + Q₀σ_x + ϑ̇/2·σ_y.
    ///
    /// Populations agree with propagating [`Self::profile`] up to the
    /// z-dependent phase frame between the two representations.
    pub fn propagate_two_field(
        &self,
        initial: ModeState,
        solver: &SolverConfig,
    ) -> Result<Trajectory> {
        let d = *self;
        propagate_complex_coupling(
            move |z| d.delta_k(z),
            move |z| C64::new(d.base.q0, -0.5 * d.theta_dot(z)),
            d.base.length_mm,
            initial,
            solver,
        )
    }

    /// Bare (uncorrected) drive of the base design; eigenstate tracking under
    /// [`Self::propagate_two_field`] is measured against this.
    pub fn bare_profile(&self) -> Result<DriveProfile> {
        self.base.profile()
    }

    /// Eigenstate of the bare Hamiltonian at z = 0 on the branch connected to
    /// the pure signal mode.
    pub fn entry_eigenstate(&self) -> ModeState {
        let half = self.theta(0.0) / 2.0;
        ModeState::new(C64::new(half.cos(), 0.0), C64::new(half.sin(), 0.0))
    }
}

/// Counter-diabatic design for a linear-sweep base; requires a nonzero slope.
pub fn design_cd(base: AdiabaticLzDesign) -> Result<(DriveProfile, CdDesign)> {
    if base.alpha == 0.0 {
        return Err(Error::Design(
            "counter-diabatic correction needs a nonzero sweep slope".into(),
        ));
    }
    if !(base.q0 > 0.0) {
        return Err(Error::Design(format!(
            "counter-diabatic design needs positive coupling, got q0 = {}",
            base.q0
        )));
    }
    let design = CdDesign { base };
    Ok((design.profile()?, design))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn base(length_mm: f64, q0: f64) -> AdiabaticLzDesign {
        let span = 42.504213138370_f64;
        AdiabaticLzDesign {
            delta0: span / 2.0,
            alpha: span / length_mm,
            q0,
            length_mm,
            gvm_offset: 0.0,
        }
    }

    #[test]
    fn mixing_angle_anchors() {
        assert!(mixing_angle(1e12, 1.0).unwrap() < 1e-11);
        assert_relative_eq!(mixing_angle(-1e12, 1.0).unwrap(), PI, max_relative = 1e-9);
        assert_relative_eq!(mixing_angle(0.0, 2.0).unwrap(), FRAC_PI_2);
        assert_relative_eq!(mixing_angle(2.0, 1.0).unwrap(), FRAC_PI_4);
        assert!(mixing_angle(0.0, 0.0).is_err());
    }

    #[test]
    fn correction_vanishes_in_adiabatic_limit() {
        // shrinking alpha at fixed length: Q_eff -> Q0 and dK_eff -> dK
        let d = CdDesign {
            base: AdiabaticLzDesign {
                delta0: 1e-7,
                alpha: 1e-7,
                q0: 1.5,
                length_mm: 2.0,
                gvm_offset: 0.0,
            },
        };
        let z = 1.0;
        assert_relative_eq!(d.q_eff(z), d.base.q0, max_relative = 1e-12);
        assert!((d.delta_k_eff(z) - d.delta_k(z)).abs() < 1e-12);
    }

    #[test]
    fn effective_coupling_dominated_by_correction_at_short_length() {
        let (_p, d) = design_cd(base(0.2, 0.615266316873)).unwrap();
        // at the zero crossing: theta_dot/2 = alpha / (4 q0)
        let expected = d.base.alpha / (4.0 * d.base.q0);
        assert!(d.max_q_eff() > expected);
        assert_relative_eq!(d.max_q_eff(), 86.355474923161, max_relative = 1e-9);
    }

    #[test]
    fn q_eff_never_below_q0() {
        let (_p, d) = design_cd(base(2.0, 1.507088532261)).unwrap();
        for i in 0..=200 {
            let z = 2.0 * (i as f64) / 200.0;
            assert!(d.q_eff(z) >= d.base.q0);
        }
    }

    #[test]
    fn phi_dot_matches_finite_difference() {
        let (_p, d) = design_cd(base(2.0, 1.507088532261)).unwrap();
        let h = 1e-6;
        for &z in &[0.3, 0.9, 1.0, 1.7] {
            let fd = (d.phi(z + h) - d.phi(z - h)) / (2.0 * h);
            assert_relative_eq!(d.phi_dot(z), fd, max_relative = 1e-6);
            let fd2 = (d.phi_dot(z + h) - d.phi_dot(z - h)) / (2.0 * h);
            assert_relative_eq!(d.phi_ddot(z), fd2, max_relative = 1e-4);
        }
    }

    #[test]
    fn zero_slope_is_a_design_error() {
        let mut b = base(2.0, 1.0);
        b.alpha = 0.0;
        assert!(matches!(design_cd(b), Err(Error::Design(_))));
    }
}
