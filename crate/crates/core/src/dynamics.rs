//! Propagation engine for the two-level rotating-frame equation and the
//! original coupled-mode equations.
//!
//! The rotating-frame Hamiltonian is
//!
//! ```text
//! H(z) = ΔK(z)/2 · σ_z + Q(z) · σ_x
//! ```
//!
//! acting on the normalized signal/idler pair (a₁, a₃) via
//! i d/dz (a₁, a₃)ᵀ = H(z) (a₁, a₃)ᵀ. The pure signal mode maps to the north
//! pole of the Bloch sphere, ⟨σ_z⟩ = |a₁|² − |a₃|².

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode;

/// Integration settings: tolerances plus the number of stored samples.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Number of output samples over `[0, L]`; at least 500 for plotting.
    pub samples: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-12, samples: 1001 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0 && self.abs_tol > 0.0 && self.abs_tol < 1.0)
        {
            return Err(Error::Contract(format!(
                "tolerances must lie in (0, 1), got rel_tol={}, abs_tol={}",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.samples < 2 {
            return Err(Error::Contract("sample count must be at least 2".into()));
        }
        Ok(())
    }
}

/// Complex signal/idler amplitude pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub a1: C64,
    pub a3: C64,
}

impl ModeState {
    pub const PURE_SIGNAL: ModeState =
        ModeState { a1: C64 { re: 1.0, im: 0.0 }, a3: C64 { re: 0.0, im: 0.0 } };

    pub fn new(a1: C64, a3: C64) -> Self {
        Self { a1, a3 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a1.norm_sqr() + self.a3.norm_sqr()
    }

    pub fn signal_population(&self) -> f64 {
        self.a1.norm_sqr()
    }

    pub fn idler_population(&self) -> f64 {
        self.a3.norm_sqr()
    }

    fn check_normalized(&self) -> Result<()> {
        if (self.norm_sqr() - 1.0).abs() > 1e-8 {
            return Err(Error::Contract(format!(
                "initial state must be normalized, |a1|^2 + |a3|^2 = {}",
                self.norm_sqr()
            )));
        }
        Ok(())
    }
}

/// Bloch vector (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩) of a normalized state.
pub fn bloch_vector(state: &ModeState) -> [f64; 3] {
    let cross = state.a1.conj() * state.a3;
    [2.0 * cross.re, 2.0 * cross.im, state.a1.norm_sqr() - state.a3.norm_sqr()]
}

/// The z-dependent pair (ΔK(z), Q(z)) driving the two-level system, plus the
/// crystal length and scheme metadata.
#[derive(Clone)]
pub struct DriveProfile {
    delta_k: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    coupling: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Analytic ∂z ΔK when the scheme provides one.
    delta_k_slope: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    length_mm: f64,
    metadata: ProfileMetadata,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileMetadata {
    pub scheme: String,
    pub params: serde_json::Value,
}

impl std::fmt::Debug for DriveProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DriveProfile")
            .field("scheme", &self.metadata.scheme)
            .field("length_mm", &self.length_mm)
            .finish_non_exhaustive()
    }
}

impl DriveProfile {
    pub fn new(
        delta_k: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        coupling: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        delta_k_slope: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
        length_mm: f64,
        metadata: ProfileMetadata,
    ) -> Result<Self> {
        if !(length_mm > 0.0) {
            return Err(Error::Design(format!("profile length must be positive, got {length_mm}")));
        }
        let profile = Self { delta_k, coupling, delta_k_slope, length_mm, metadata };
        // reject profiles that are not finite on [0, L]
        for i in 0..=1000 {
            let z = length_mm * (i as f64) / 1000.0;
            let (dk, q) = (profile.delta_k(z), profile.coupling(z));
            if !dk.is_finite() || !q.is_finite() {
                return Err(Error::Design(format!(
                    "profile not finite at z = {z} mm (delta_k = {dk}, coupling = {q})"
                )));
            }
        }
        Ok(profile)
    }

    pub fn delta_k(&self, z: f64) -> f64 {
        (self.delta_k)(z)
    }

    pub fn coupling(&self, z: f64) -> f64 {
        (self.coupling)(z)
    }

    pub fn length_mm(&self) -> f64 {
        self.length_mm
    }

    pub fn metadata(&self) -> &ProfileMetadata {
        &self.metadata
    }

    /// ∂z ΔK, analytic when available, else central difference with step L·1e-6.
    pub fn delta_k_slope(&self, z: f64) -> f64 {
        match &self.delta_k_slope {
            Some(f) => f(z),
            None => {
                let h = self.length_mm * 1e-6;
                let zl = (z - h).max(0.0);
                let zr = (z + h).min(self.length_mm);
                (self.delta_k(zr) - self.delta_k(zl)) / (zr - zl)
            }
        }
    }

    /// Same drive with the mismatch shifted by a constant and the coupling
    /// scaled; used by perturbation sweeps over a fabricated crystal.
    pub fn shifted_scaled(&self, delta_k_shift: f64, coupling_scale: f64) -> DriveProfile {
        let dk = Arc::clone(&self.delta_k);
        let q = Arc::clone(&self.coupling);
        let slope = self.delta_k_slope.clone();
        DriveProfile {
            delta_k: Arc::new(move |z| dk(z) + delta_k_shift),
            coupling: Arc::new(move |z| coupling_scale * q(z)),
            delta_k_slope: slope,
            length_mm: self.length_mm,
            metadata: self.metadata.clone(),
        }
    }

    /// First `length_mm` millimetres of this drive (a diced crystal exposing
    /// the initial section of the fabricated poling).
    pub fn truncated(&self, length_mm: f64) -> Result<DriveProfile> {
        if !(length_mm > 0.0 && length_mm <= self.length_mm) {
            return Err(Error::Design(format!(
                "truncation length {length_mm} mm must lie in (0, {}] mm",
                self.length_mm
            )));
        }
        let mut out = self.clone();
        out.length_mm = length_mm;
        Ok(out)
    }
}

/// Sampled evolution of the mode amplitudes along the crystal.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub z_samples: Vec<f64>,
    pub states: Vec<ModeState>,
    /// max over samples of | |a1|² + |a3|² − 1 |.
    pub norm_drift: f64,
}

impl Trajectory {
    pub fn initial_state(&self) -> &ModeState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &ModeState {
        self.states.last().expect("trajectory has at least two samples")
    }

    fn from_samples(z_samples: Vec<f64>, states: Vec<ModeState>) -> Self {
        let norm_drift = states
            .iter()
            .map(|s| (s.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max);
        Self { z_samples, states, norm_drift }
    }

    /// CSV export: z, amplitudes, populations, Bloch components.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "z_mm,re_a1,im_a1,re_a3,im_a3,pop1,pop3,bloch_x,bloch_y,bloch_z")?;
        for (z, s) in self.z_samples.iter().zip(&self.states) {
            let b = bloch_vector(s);
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                z,
                s.a1.re,
                s.a1.im,
                s.a3.re,
                s.a3.im,
                s.signal_population(),
                s.idler_population(),
                b[0],
                b[1],
                b[2]
            )?;
        }
        Ok(())
    }
}

fn sample_grid(length: f64, samples: usize) -> Vec<f64> {
    (0..samples).map(|i| length * (i as f64) / (samples - 1) as f64).collect()
}

/// Integrate the rotating-frame equation with a possibly complex coupling
/// q(z); the off-diagonal entry of the Hamiltonian is q, its conjugate below.
pub(crate) fn propagate_complex_coupling(
    delta_k: impl Fn(f64) -> f64,
    coupling: impl Fn(f64) -> C64,
    length_mm: f64,
    initial: ModeState,
    solver: &SolverConfig,
) -> Result<Trajectory> {
    solver.validate()?;
    initial.check_normalized()?;
    let rhs = |z: f64, y: &[C64; 2]| -> [C64; 2] {
        let half_dk = 0.5 * delta_k(z);
        let q = coupling(z);
        [
            -C64::i() * (half_dk * y[0] + q * y[1]),
            -C64::i() * (q.conj() * y[0] - half_dk * y[1]),
        ]
    };
    let sol = ode::integrate_conserving(
        rhs,
        0.0,
        length_mm,
        [initial.a1, initial.a3],
        solver.rel_tol,
        solver.abs_tol,
        Some(2),
    )?;
    let zs = sample_grid(length_mm, solver.samples.max(2));
    let states = zs
        .iter()
        .map(|&z| {
            let y = sol.sample(z);
            ModeState::new(y[0], y[1])
        })
        .collect();
    Ok(Trajectory::from_samples(zs, states))
}

/// Propagate a [`DriveProfile`] from `initial`.
pub fn propagate(
    profile: &DriveProfile,
    initial: ModeState,
    solver: &SolverConfig,
) -> Result<Trajectory> {
    propagate_complex_coupling(
        |z| profile.delta_k(z),
        |z| C64::new(profile.coupling(z), 0.0),
        profile.length_mm(),
        initial,
        solver,
    )
}

/// Integrate the original-frame coupled-mode equations
///
/// ```text
/// dÃ₁/dz = −i q Ã₃ e^{−iΦ(z)},   dÃ₃/dz = −i q* Ã₁ e^{iΦ(z)},
/// Φ(z) = ∫₀ᶻ ΔK(z′) dz′
/// ```
///
/// with constant complex coupling q. The accumulated phase is carried as an
/// extra integration variable, so no separate quadrature of ΔK is needed.
/// Used as an independent cross-check of the rotating-frame transformation.
pub fn propagate_original_frame(
    q: C64,
    mismatch: impl Fn(f64) -> f64,
    length_mm: f64,
    initial: ModeState,
    solver: &SolverConfig,
) -> Result<Trajectory> {
    solver.validate()?;
    initial.check_normalized()?;
    let rhs = |z: f64, y: &[C64; 3]| -> [C64; 3] {
        let phase = C64::new(0.0, y[2].re);
        [
            -C64::i() * q * y[1] * (-phase).exp(),
            -C64::i() * q.conj() * y[0] * phase.exp(),
            C64::new(mismatch(z), 0.0),
        ]
    };
    let sol = ode::integrate_conserving(
        rhs,
        0.0,
        length_mm,
        [initial.a1, initial.a3, C64::new(0.0, 0.0)],
        solver.rel_tol,
        solver.abs_tol,
        Some(2),
    )?;
    let zs = sample_grid(length_mm, solver.samples.max(2));
    let states = zs
        .iter()
        .map(|&z| {
            let y = sol.sample(z);
            ModeState::new(y[0], y[1])
        })
        .collect();
    Ok(Trajectory::from_samples(zs, states))
}

/// Adiabaticity measure C_ad = |Q ∂zΔK| / (Q² + ΔK²)^{3/2} at `z`.
pub fn adiabaticity_measure(profile: &DriveProfile, z: f64) -> Result<f64> {
    if !(0.0..=profile.length_mm()).contains(&z) {
        return Err(Error::Contract(format!(
            "z = {z} outside [0, {}]",
            profile.length_mm()
        )));
    }
    let q = profile.coupling(z);
    let dk = profile.delta_k(z);
    let denom = q * q + dk * dk;
    if denom == 0.0 {
        return Err(Error::Singularity {
            z,
            message: "coupling and mismatch simultaneously zero".into(),
        });
    }
    Ok((q * profile.delta_k_slope(z)).abs() / denom.powf(1.5))
}

/// Maximum of the adiabaticity measure over a uniform grid.
pub fn max_adiabaticity(profile: &DriveProfile, grid_points: usize) -> Result<f64> {
    let mut max = 0.0f64;
    for i in 0..grid_points {
        let z = profile.length_mm() * (i as f64) / (grid_points - 1) as f64;
        max = max.max(adiabaticity_measure(profile, z)?);
    }
    Ok(max)
}

/// Conversion efficiency |a₃(L)|² / |a₁(0)|² of a trajectory that starts in
/// the pure signal mode.
pub fn efficiency(trajectory: &Trajectory) -> Result<f64> {
    let first = trajectory.initial_state();
    if first.idler_population() > 1e-9 || (first.signal_population() - 1.0).abs() > 1e-9 {
        return Err(Error::Contract(format!(
            "efficiency requires a pure signal start, got |a1|^2 = {}, |a3|^2 = {}",
            first.signal_population(),
            first.idler_population()
        )));
    }
    Ok(trajectory.final_state().idler_population() / first.signal_population())
}

/// Instantaneous eigenvector of H(z) on the branch continuously connected to
/// the trajectory's initial state: (cos ϑ/2, sin ϑ/2) with ϑ = atan2(2Q, ΔK)
/// when the initial state is closest to the upper branch, and its orthogonal
/// complement otherwise.
pub fn eigenstate_fidelity(profile: &DriveProfile, trajectory: &Trajectory) -> Result<Vec<f64>> {
    let z0 = trajectory.z_samples[0];
    let (q0, dk0) = (profile.coupling(z0), profile.delta_k(z0));
    if q0 == 0.0 && dk0 == 0.0 {
        return Err(Error::Singularity { z: z0, message: "degenerate eigenvalues".into() });
    }
    let theta0 = f64::atan2(2.0 * q0, dk0);
    let s0 = trajectory.initial_state();
    let up = (s0.a1 * (theta0 / 2.0).cos() + s0.a3 * (theta0 / 2.0).sin()).norm_sqr();
    let down = (-s0.a1 * (theta0 / 2.0).sin() + s0.a3 * (theta0 / 2.0).cos()).norm_sqr();
    let follow_upper = up >= down;

    trajectory
        .z_samples
        .iter()
        .zip(&trajectory.states)
        .map(|(&z, s)| {
            let (q, dk) = (profile.coupling(z), profile.delta_k(z));
            if q == 0.0 && dk == 0.0 {
                return Err(Error::Singularity { z, message: "degenerate eigenvalues".into() });
            }
            let half = f64::atan2(2.0 * q, dk) / 2.0;
            let overlap = if follow_upper {
                s.a1 * half.cos() + s.a3 * half.sin()
            } else {
                -s.a1 * half.sin() + s.a3 * half.cos()
            };
            Ok(overlap.norm_sqr())
        })
        .collect()
}
