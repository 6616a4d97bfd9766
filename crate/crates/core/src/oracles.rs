//! Reference results that do not go through the master-equation machinery:
//! the exact Landau-Zener probability and a Schrödinger solver in the diabatic basis.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// `P_LZ = 1 - exp(-πε²/v)`.
pub fn p_lz_exact(v: f64, eps: f64) -> f64 {
    -(-std::f64::consts::PI * eps * eps / v).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbabilitySource {
    Exact,
    Tdqme,
    UnitarySolver,
}

/// A transition probability at one sweep velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LZProbabilityPoint {
    pub v: f64,
    pub p: f64,
    pub source: ProbabilitySource,
}

#[derive(Debug, Clone, Copy)]
pub struct UnitaryOptions {
    /// Phase advanced per step, `h (E + √v)`.
    pub phase_step: f64,
    pub max_steps: u64,
}

impl Default for UnitaryOptions {
    fn default() -> Self {
        Self {
            phase_step: 0.02,
            max_steps: 200_000_000,
        }
    }
}

const NORM_TOL: f64 = 1e-10;

/// Integrate `i dψ/dt = (vtσ_z + εσ_x) ψ` from `t0` to `tf`.
pub fn unitary_solver(
    v: f64,
    eps: f64,
    psi0: Vector2<Complex64>,
    t0: f64,
    tf: f64,
    opts: &UnitaryOptions,
) -> Result<Vector2<Complex64>> {
    Ok(unitary_trajectory(v, eps, psi0, t0, &[tf], opts)?[0])
}

/// States at every time in `times` (non-decreasing, all `≥ t0`).
///
/// Fourth-order Magnus steps with Gauss-Legendre nodes; each step is an
/// exact SU(2) rotation, so the norm is conserved to rounding.
pub fn unitary_trajectory(
    v: f64,
    eps: f64,
    psi0: Vector2<Complex64>,
    t0: f64,
    times: &[f64],
    opts: &UnitaryOptions,
) -> Result<Vec<Vector2<Complex64>>> {
    if !(v.is_finite() && eps.is_finite() && v >= 0.0 && eps >= 0.0) {
        return domain(format!("unitary solver needs finite v, eps >= 0, got v = {v}, eps = {eps}"));
    }
    if ((psi0.norm() - 1.0).abs()) > NORM_TOL {
        return Err(Error::InvalidState(format!("initial state has norm {}", psi0.norm())));
    }
    if times.iter().any(|&t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < t0) {
        return Err(Error::Contract("output times must be finite, sorted and not before t0".into()));
    }
    if !(opts.phase_step > 0.0) {
        return domain("phase step must be positive");
    }

    let scale = |t: f64| (v * t).hypot(eps) + v.sqrt();
    let mut psi = psi0;
    let mut t = t0;
    let mut steps = 0u64;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let mut h = opts.phase_step / scale(t).max(f64::MIN_POSITIVE);
            h = h.min(opts.phase_step / scale(t + h));
            if t + h >= target || target - (t + h) < 1e-3 * h {
                h = target - t;
            }
            psi = magnus_step(v, eps, t, h) * psi;
            t = if h == target - t { target } else { t + h };
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integration {
                    t,
                    reason: format!("unitary solver exceeded {} steps", opts.max_steps),
                });
            }
        }
        let drift = (psi.norm() - 1.0).abs();
        if drift > NORM_TOL {
            return Err(Error::Integration {
                t,
                reason: format!("norm drifted by {drift:.3e}"),
            });
        }
        out.push(psi);
    }
    Ok(out)
}

/// `exp(Ω)` with `Ω = -i(h/2)(H₁+H₂) - (√3/12)h²[H₂, H₁]`.
fn magnus_step(v: f64, eps: f64, t: f64, h: f64) -> Matrix2<Complex64> {
    let d = 3f64.sqrt() / 6.0;
    let (z1, z2) = (v * (t + (0.5 - d) * h), v * (t + (0.5 + d) * h));
    // H_k = z_k σ_z + ε σ_x, and [H₂, H₁] = 2iε(z₂ - z₁) σ_y.
    // Ω = -i (k_x σ_x + k_y σ_y + k_z σ_z):
    let kx = h * eps;
    let kz = 0.5 * h * (z1 + z2);
    let ky = -(3f64.sqrt() / 12.0) * h * h * 2.0 * eps * (z1 - z2);
    let k = (kx * kx + ky * ky + kz * kz).sqrt();
    let (s, c) = k.sin_cos();
    let sinc = if k > 0.0 { s / k } else { 1.0 };
    let (ax, ay, az) = (kx * sinc, ky * sinc, kz * sinc);
    // cos k - i sin k (n·σ)
    Matrix2::new(
        Complex64::new(c, -az),
        Complex64::new(-ay, -ax),
        Complex64::new(ay, -ax),
        Complex64::new(c, az),
    )
}
