//! The three drive-design schemes.
//!
//! Each scheme emits a [`crate::dynamics::DriveProfile`] plus a scheme-specific
//! design record: a plain Landau–Zener sweep fixed by the poling chirp, its
//! counter-diabatic correction, and the invariant-based constant-coupling
//! optimization.

mod adiabatic;
mod counterdiabatic;
mod invariant;

pub use adiabatic::{design_adiabatic, AdiabaticLzDesign};
pub use counterdiabatic::{design_cd, mixing_angle, CdDesign};
pub use invariant::{
    build_m, design_lz_optimal, error_integral, error_sensitivity, lr_phase, optimize_c1,
    solve_zeta, Anchor, C1Optimization, C1ScanRow, ErrorSensitivity, InvariantDesign, MSeries,
};
