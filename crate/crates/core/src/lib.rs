//! Design and direct simulation of broadband sum-frequency generation in
//! aperiodically poled nonlinear crystals.
//!
//! The crate covers the full chain from material dispersion to conversion
//! efficiency:
//!
//! - [`materials`]: Sellmeier/thermal dispersion, wavenumbers, primary phase
//!   mismatch, poling wavevectors, and the pump-driven coupling coefficient;
//! - [`dynamics`]: adaptive integration of the two-level rotating-frame
//!   equation and of the original coupled-mode equations, Bloch trajectories,
//!   adiabaticity measure, conversion efficiency;
//! - [`profiles`]: the three drive designs — plain Landau–Zener sweep,
//!   counter-diabatic correction, and invariant-based constant-coupling
//!   optimization with Fourier robustness shaping;
//! - [`sweeps`]: batch efficiency studies over wavelength/temperature grids
//!   with pump/length/coefficient families, deterministic across worker
//!   counts.

// validation sites use `!(x > 0.0)` so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
mod error;
pub mod materials;
pub mod ode;
pub mod profiles;
mod quad;
pub mod sweeps;

pub use error::{Error, Result};

/// Crate version, embedded in every emitted file for provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
