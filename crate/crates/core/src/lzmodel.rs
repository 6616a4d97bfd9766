//! Geometry of the driven two-level system `H_S(t) = vtσ_z + εσ_x`:
//! instantaneous eigenframe, nonadiabatic coupling and accumulated phases.
//!
//! Eigenvectors are kept real with `θ_t = atan2(ε, vt) ∈ (0, π)`, so the
//! Berry connections `⟨e|ė⟩` and `⟨g|ġ⟩` vanish identically and the
//! only phase is the dynamic one, `φ_eg(t) = -2∫_{t0}^t E_e(τ) dτ`.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::bath::BathParams;
use crate::error::{domain, Result};

/// Which Pauli operator of the two-level system couples to the bath.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// `V = σ_x ⊗ B`.
    Transverse,
    /// `V = σ_z ⊗ B`.
    Longitudinal,
}

/// Sweep, gap, bath and time window of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    v: f64,
    eps: f64,
    bath: BathParams,
    coupling: Coupling,
    t0: f64,
    tf: f64,
    tau_lz: f64,
}

impl ModelParams {
    pub fn new(v: f64, eps: f64, bath: BathParams, coupling: Coupling, t0: f64, tf: f64) -> Result<Self> {
        if !(v > 0.0) || !v.is_finite() {
            return domain(format!("sweep velocity must be finite and > 0, got {v}"));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return domain(format!("tunneling amplitude must be finite and > 0, got {eps}"));
        }
        if !(t0 < 0.0 && tf > 0.0) || !t0.is_finite() || !tf.is_finite() {
            return domain(format!("time window must satisfy t0 < 0 < tf, got [{t0}, {tf}]"));
        }
        Ok(Self {
            v,
            eps,
            bath,
            coupling,
            t0,
            tf,
            tau_lz: eps / v,
        })
    }

    /// Window `[-w τ_LZ, w τ_LZ]`.
    pub fn symmetric(v: f64, eps: f64, bath: BathParams, coupling: Coupling, window_tau: f64) -> Result<Self> {
        let tau = eps / v;
        Self::new(v, eps, bath, coupling, -window_tau * tau, window_tau * tau)
    }

    pub fn v(&self) -> f64 {
        self.v
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn bath(&self) -> &BathParams {
        &self.bath
    }
    pub fn coupling(&self) -> Coupling {
        self.coupling
    }
    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn tf(&self) -> f64 {
        self.tf
    }
    /// `τ_LZ = ε/v`.
    pub fn tau_lz(&self) -> f64 {
        self.tau_lz
    }

    pub fn with_bath(&self, bath: BathParams) -> Self {
        Self { bath, ..*self }
    }

    pub fn with_coupling(&self, coupling: Coupling) -> Self {
        Self { coupling, ..*self }
    }

    /// `E_e(t) = √(v²t² + ε²)`.
    #[inline]
    pub fn energy(&self, t: f64) -> f64 {
        (self.v * t).hypot(self.eps)
    }

    /// `H_S(t)` in the diabatic basis `{|↑⟩, |↓⟩}`.
    pub fn hamiltonian(&self, t: f64) -> Matrix2<Complex64> {
        let z = Complex64::new(self.v * t, 0.0);
        let x = Complex64::new(self.eps, 0.0);
        Matrix2::new(z, x, x, -z)
    }
}

/// Instantaneous eigenbasis of `H_S(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFrame {
    pub t: f64,
    /// Mixing angle `θ_t ∈ (0, π)`, `tan θ_t = ε/(vt)`.
    pub theta: f64,
    /// `E_e(t) = -E_g(t)`.
    pub energy_e: f64,
    /// `|e(t)⟩` in the diabatic basis.
    pub excited: [f64; 2],
    /// `|g(t)⟩` in the diabatic basis.
    pub ground: [f64; 2],
}

impl EigenFrame {
    pub fn cos_theta(&self) -> f64 {
        self.theta.cos()
    }
    pub fn sin_theta(&self) -> f64 {
        self.theta.sin()
    }
}

/// Eigenframe with `|e⟩ = cos(θ/2)|↑⟩ + sin(θ/2)|↓⟩`, `|g⟩ = -sin(θ/2)|↑⟩ + cos(θ/2)|↓⟩`.
pub fn eigenframe(t: f64, mp: &ModelParams) -> EigenFrame {
    eigenframe_with_gauge(t, mp, false)
}

/// As [`eigenframe`]; `flip_excited` negates `|e(t)⟩` at every `t`.
pub fn eigenframe_with_gauge(t: f64, mp: &ModelParams, flip_excited: bool) -> EigenFrame {
    let theta = mp.eps.atan2(mp.v * t);
    let (s, c) = (0.5 * theta).sin_cos();
    let sign = if flip_excited { -1.0 } else { 1.0 };
    EigenFrame {
        t,
        theta,
        energy_e: mp.energy(t),
        excited: [sign * c, sign * s],
        ground: [-s, c],
    }
}

/// Accumulated phase difference `φ_eg(t) = η_e(t) - η_g(t)`; Berry phases are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub phi_eg: f64,
}

impl PhaseState {
    pub fn at(t: f64, mp: &ModelParams) -> Result<Self> {
        Ok(Self {
            phi_eg: dynamic_phase(t, mp)?,
        })
    }

    /// `η_e = -η_g = φ_eg/2`.
    pub fn eta_e(&self) -> f64 {
        0.5 * self.phi_eg
    }
    pub fn eta_g(&self) -> f64 {
        -0.5 * self.phi_eg
    }
}

/// `⟨e(t)|ġ(t)⟩ = εv / (2(v²t² + ε²))`.
#[inline]
pub fn transition_strength(t: f64, mp: &ModelParams) -> f64 {
    let e = mp.energy(t);
    0.5 * mp.eps * mp.v / (e * e)
}

/// `α_eg(t) = -i e^{-iφ_eg(t)} ⟨e(t)|ġ(t)⟩`.
pub fn nonadiabatic_coupling(t: f64, mp: &ModelParams, phase: &PhaseState) -> Complex64 {
    let (s, c) = phase.phi_eg.sin_cos();
    // -i (c - i s) = -s - i c
    transition_strength(t, mp) * Complex64::new(-s, -c)
}

/// `F(x1) - F(x2)` for the antiderivative `F(x) = x√(v²x²+ε²) + (ε²/v) asinh(vx/ε)`
/// of `2E_e(x)`, given `diff = x1 - x2` exactly.
///
/// When both ends share a sign the difference is rewritten so that no large
/// terms cancel.
pub(crate) fn antiderivative_diff(x1: f64, x2: f64, diff: f64, mp: &ModelParams) -> f64 {
    let (v, eps) = (mp.v, mp.eps);
    let (e1, e2) = (mp.energy(x1), mp.energy(x2));
    let (a, b) = (v * x1 / eps, v * x2 / eps);
    if x1 * x2 > 0.0 {
        let sum = x1 + x2;
        let poly = (diff * sum) * (v * v * (x1 * x1 + x2 * x2) + eps * eps) / (x1 * e1 + x2 * e2);
        let asinh_arg = (v * diff / eps) * (a + b) / (a * b.hypot(1.0) + b * a.hypot(1.0));
        poly + eps * eps / v * asinh_arg.asinh()
    } else {
        x1 * e1 - x2 * e2 + eps * eps / v * (a.asinh() - b.asinh())
    }
}

/// `Δ(t, s) = 2∫₀ˢ √(v²(t-τ)² + ε²) dτ`, evaluated in closed form.
pub fn delta_phase(t: f64, s: f64, mp: &ModelParams) -> Result<f64> {
    if !(s >= 0.0) {
        return domain(format!("phase lag needs s >= 0, got {s}"));
    }
    Ok(delta_phase_unchecked(t, s, mp))
}

#[inline]
pub(crate) fn delta_phase_unchecked(t: f64, s: f64, mp: &ModelParams) -> f64 {
    antiderivative_diff(t, t - s, s, mp)
}

/// `φ_eg(t) = -2∫_{t0}^t E_e(τ) dτ`.
pub fn dynamic_phase(t: f64, mp: &ModelParams) -> Result<f64> {
    if t < mp.t0 {
        return domain(format!("dynamic phase requested at t = {t} before t0 = {}", mp.t0));
    }
    Ok(-antiderivative_diff(t, mp.t0, t - mp.t0, mp))
}
