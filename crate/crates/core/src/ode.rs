//! Embedded Dormand–Prince 5(4) integrator with dense output.
//!
//! The state is a fixed-size array of complex amplitudes. Error control is the
//! usual mixed absolute/relative RMS norm, and accepted steps keep the
//! fourth-order continuous extension so trajectories can be sampled anywhere
//! without re-integrating.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

// Butcher tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

// e = b5 - b4, error-estimator weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense-output weights
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy<const N: usize>(y: &[C64; N], a: f64, x: &[C64; N]) -> [C64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * x[i];
    }
    out
}

#[derive(Clone)]
struct DenseStep<const N: usize> {
    z: f64,
    h: f64,
    rcont: [[C64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    fn eval(&self, z: f64) -> [C64; N] {
        let theta = (z - self.z) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        let mut out = [C64::new(0.0, 0.0); N];
        for i in 0..N {
            out[i] = r1[i]
                + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
        }
        out
    }
}

/// Integration result with continuous interpolation over `[z0, z_end]`.
pub struct DenseSolution<const N: usize> {
    z0: f64,
    z_end: f64,
    steps: Vec<DenseStep<N>>,
    y_final: [C64; N],
    pub n_accepted: usize,
    pub n_rejected: usize,
}

impl<const N: usize> DenseSolution<N> {
    pub fn z_end(&self) -> f64 {
        self.z_end
    }

    pub fn y_final(&self) -> [C64; N] {
        self.y_final
    }

    /// Interpolated state at `z` (clamped to the integration interval).
    pub fn sample(&self, z: f64) -> [C64; N] {
        if z >= self.z_end {
            return self.y_final;
        }
        let z = z.max(self.z0);
        // binary search for the step containing z
        let idx = self
            .steps
            .partition_point(|s| s.z + s.h < z)
            .min(self.steps.len() - 1);
        self.steps[idx].eval(z)
    }
}

/// Initial step-size guess following the usual ‖y‖/‖f‖ heuristic with one
/// Euler probe.
fn initial_step<const N: usize>(
    rhs: &impl Fn(f64, &[C64; N]) -> [C64; N],
    z0: f64,
    y0: &[C64; N],
    f0: &[C64; N],
    z_span: f64,
    rtol: f64,
    atol: f64,
) -> f64 {
    let sc = |y: &[C64; N]| -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let s = atol + rtol * y[i].norm();
            acc += (y[i].norm() / s).powi(2);
        }
        (acc / N as f64).sqrt()
    };
    let d0 = sc(y0);
    let d1 = sc(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * z_span } else { 0.01 * d0 / d1 };
    let h0 = h0.min(z_span);
    let y1 = axpy(y0, h0, f0);
    let f1 = rhs(z0 + h0, &y1);
    let mut acc = 0.0;
    for ((a, b), y) in f1.iter().zip(f0).zip(y0) {
        let s = atol + rtol * y.norm();
        acc += ((a - b).norm() / s).powi(2);
    }
    let d2 = (acc / N as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6 * z_span)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(z_span)
}

/// Integrate `dy/dz = rhs(z, y)` from `z0` to `z_end` (forward only).
pub fn integrate<const N: usize>(
    rhs: impl Fn(f64, &[C64; N]) -> [C64; N],
    z0: f64,
    z_end: f64,
    y0: [C64; N],
    rtol: f64,
    atol: f64,
) -> Result<DenseSolution<N>> {
    integrate_conserving(rhs, z0, z_end, y0, rtol, atol, None)
}

/// Like [`integrate`], but when the flow conserves the norm of the leading
/// `unit_norm_components` entries (Hermitian evolution), each accepted step is
/// projected back onto that shell. This removes the accumulated part of the
/// norm drift while leaving the per-step interpolation error visible.
pub fn integrate_conserving<const N: usize>(
    rhs: impl Fn(f64, &[C64; N]) -> [C64; N],
    z0: f64,
    z_end: f64,
    y0: [C64; N],
    rtol: f64,
    atol: f64,
    unit_norm_components: Option<usize>,
) -> Result<DenseSolution<N>> {
    if !(z_end > z0) {
        return Err(Error::Contract(format!(
            "integration interval must be forward, got [{z0}, {z_end}]"
        )));
    }
    if !(rtol > 0.0 && rtol < 1.0 && atol > 0.0 && atol < 1.0) {
        return Err(Error::Contract(format!(
            "tolerances must lie in (0, 1), got rel_tol={rtol}, abs_tol={atol}"
        )));
    }
    let span = z_end - z0;
    let h_min = span * 1e-14;
    let max_steps = 10_000_000usize;

    let mut z = z0;
    let mut y = y0;
    let mut k1 = rhs(z, &y);
    let mut h = initial_step(&rhs, z, &y, &k1, span, rtol, atol);
    let mut steps: Vec<DenseStep<N>> = Vec::new();
    let mut n_accepted = 0usize;
    let mut n_rejected = 0usize;
    let mut just_rejected = false;

    for _ in 0..max_steps {
        if z >= z_end {
            break;
        }
        if h < h_min {
            return Err(Error::Integration {
                z,
                message: format!(
                    "step size underflow (h = {h:.3e} mm); profile too stiff for the tolerance"
                ),
            });
        }
        h = h.min(z_end - z);

        let y2 = axpy(&y, h * A21, &k1);
        let k2 = rhs(z + C2 * h, &y2);
        let mut yt = axpy(&y, h * A31, &k1);
        yt = axpy(&yt, h * A32, &k2);
        let k3 = rhs(z + C3 * h, &yt);
        let mut yt = axpy(&y, h * A41, &k1);
        yt = axpy(&yt, h * A42, &k2);
        yt = axpy(&yt, h * A43, &k3);
        let k4 = rhs(z + C4 * h, &yt);
        let mut yt = axpy(&y, h * A51, &k1);
        yt = axpy(&yt, h * A52, &k2);
        yt = axpy(&yt, h * A53, &k3);
        yt = axpy(&yt, h * A54, &k4);
        let k5 = rhs(z + C5 * h, &yt);
        let mut yt = axpy(&y, h * A61, &k1);
        yt = axpy(&yt, h * A62, &k2);
        yt = axpy(&yt, h * A63, &k3);
        yt = axpy(&yt, h * A64, &k4);
        yt = axpy(&yt, h * A65, &k5);
        let k6 = rhs(z + h, &yt);
        let mut y_new = axpy(&y, h * A71, &k1);
        y_new = axpy(&y_new, h * A73, &k3);
        y_new = axpy(&y_new, h * A74, &k4);
        y_new = axpy(&y_new, h * A75, &k5);
        y_new = axpy(&y_new, h * A76, &k6);
        let k7 = rhs(z + h, &y_new);

        // error estimate
        let mut err_acc = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = atol + rtol * y[i].norm().max(y_new[i].norm());
            err_acc += (e.norm() / scale).powi(2);
        }
        let err = (err_acc / N as f64).sqrt();

        if err <= 1.0 {
            // accept; build dense output
            let mut rcont = [[C64::new(0.0, 0.0); N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k7[i] - bspl;
                rcont[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            steps.push(DenseStep { z, h, rcont });
            z += h;
            y = y_new;
            k1 = k7; // FSAL
            if let Some(m) = unit_norm_components {
                let norm: f64 = y.iter().take(m).map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if norm > 0.0 && (norm - 1.0).abs() > 1e-16 {
                    let scale = 1.0 / norm;
                    for c in y.iter_mut().take(m) {
                        *c *= scale;
                    }
                    k1 = rhs(z, &y); // projection invalidates the FSAL stage
                }
            }
            n_accepted += 1;

            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, if just_rejected { 1.0 } else { 5.0 });
            h *= fac;
            just_rejected = false;
        } else {
            n_rejected += 1;
            just_rejected = true;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }

    if z < z_end {
        return Err(Error::Integration {
            z,
            message: "maximum step count exceeded".into(),
        });
    }

    Ok(DenseSolution { z0, z_end, steps, y_final: y, n_accepted, n_rejected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_decay() {
        let sol = integrate(
            |_z, y: &[C64; 1]| [-y[0]],
            0.0,
            5.0,
            [C64::new(1.0, 0.0)],
            1e-10,
            1e-12,
        )
        .unwrap();
        assert_relative_eq!(sol.y_final()[0].re, (-5.0f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn dense_output_matches_closed_form() {
        // i y' = q sigma_x y  =>  |y2(z)|^2 = sin^2(q z)
        let q = 0.73;
        let rhs = move |_z: f64, y: &[C64; 2]| {
            [-C64::i() * q * y[1], -C64::i() * q * y[0]]
        };
        let sol = integrate(rhs, 0.0, 30.0, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)], 1e-9, 1e-12)
            .unwrap();
        for i in 0..=700 {
            let z = 30.0 * (i as f64) / 700.0;
            let y = sol.sample(z);
            let expected = (q * z).sin().powi(2);
            assert!(
                (y[1].norm_sqr() - expected).abs() < 1e-8,
                "z = {z}: {} vs {expected}",
                y[1].norm_sqr()
            );
        }
    }

    #[test]
    fn invalid_tolerances_rejected() {
        let r = integrate(|_z, y: &[C64; 1]| [y[0]], 0.0, 1.0, [C64::new(1.0, 0.0)], 2.0, 1e-12);
        assert!(matches!(r, Err(Error::Contract(_))));
    }
}
