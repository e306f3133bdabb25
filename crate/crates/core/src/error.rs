//! Error types shared across the toolkit.

use thiserror::Error;

/// Unified error type for material, design, and propagation failures.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the physical domain of an operation (bad wavelength,
    /// negative intensity, out-of-band query, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A material file failed to parse or violates its own invariants.
    #[error("material model error: {0}")]
    Material(String),

    /// A drive design cannot be constructed from the given inputs.
    #[error("design error: {0}")]
    Design(String),

    /// An API contract was violated (inconsistent parameter set,
    /// non-normalized initial state, ...).
    #[error("contract error: {0}")]
    Contract(String),

    /// A quantity is singular at the requested point.
    #[error("singularity at z = {z} mm: {message}")]
    Singularity { z: f64, message: String },

    /// The adaptive integrator could not proceed.
    #[error("integration failure at z = {z} mm: {message}")]
    Integration { z: f64, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
