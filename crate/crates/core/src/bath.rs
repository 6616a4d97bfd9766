//! Ohmic bath: spectral density, Bose occupation, trigamma function and the
//! closed-form bath correlation function.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Parameters of the thermal Ohmic bath with exponential cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    gamma: f64,
    omega_c: f64,
    temperature: f64,
    beta: f64,
}

impl BathParams {
    /// `gamma ≥ 0`, `omega_c > 0`, `temperature > 0`.
    pub fn new(gamma: f64, omega_c: f64, temperature: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return domain(format!("coupling strength must be finite and >= 0, got {gamma}"));
        }
        if !(omega_c > 0.0) || !omega_c.is_finite() {
            return domain(format!("cutoff frequency must be finite and > 0, got {omega_c}"));
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return domain(format!("temperature must be finite and > 0, got {temperature}"));
        }
        Ok(Self {
            gamma,
            omega_c,
            temperature,
            beta: 1.0 / temperature,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Copy with a different coupling strength.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(gamma, self.omega_c, self.temperature)
    }

    /// Time over which the correlation function has decayed from its peak:
    /// the larger of the thermal time `β` and the cutoff time `1/ω_c`.
    pub fn correlation_time(&self) -> f64 {
        self.beta.max(1.0 / self.omega_c)
    }
}

/// `J(ω) = πγω e^{-ω/ω_c}`.
pub fn spectral_density(omega: f64, bp: &BathParams) -> Result<f64> {
    if !(omega >= 0.0) {
        return domain(format!("spectral density needs omega >= 0, got {omega}"));
    }
    Ok(PI * bp.gamma * omega * (-omega / bp.omega_c).exp())
}

/// `n(ω) = 1/(e^{βω} - 1)`.
pub fn bose_occupation(omega: f64, bp: &BathParams) -> Result<f64> {
    if !(omega > 0.0) {
        return domain(format!("Bose occupation diverges at omega <= 0, got {omega}"));
    }
    Ok(1.0 / (bp.beta * omega).exp_m1())
}

// B_{2k} for k = 1..=8.
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

// Below this modulus the argument is shifted up before the asymptotic series is used.
const ASYMPTOTIC_RADIUS: f64 = 10.0;

/// Trigamma function `ψ⁽¹⁾(z) = Σ_{k≥0} 1/(z+k)²` for complex `z`.
///
/// Shifts `z` with `ψ⁽¹⁾(z) = ψ⁽¹⁾(z+1) + 1/z²` until `|z| ≥ 10` and
/// `Re z ≥ 0`, then sums the asymptotic series
/// `1/z + 1/(2z²) + Σ B_{2k}/z^{2k+1}` through `B_16`.
pub fn trigamma(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return domain(format!("trigamma needs a finite argument, got {z}"));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return domain(format!("trigamma has a pole at {}", z.re));
    }
    Ok(trigamma_unchecked(z))
}

#[inline]
pub(crate) fn trigamma_unchecked(mut z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re < 0.0 || z.norm_sqr() < ASYMPTOTIC_RADIUS * ASYMPTOTIC_RADIUS {
        acc += (z * z).inv();
        z += 1.0;
    }
    let w = z.inv();
    let w2 = w * w;
    // Horner in w² for Σ B_{2k} w^{2k}.
    let mut series = Complex64::new(0.0, 0.0);
    for &b in BERNOULLI.iter().rev() {
        series = (series + b) * w2;
    }
    acc + w * (1.0 + 0.5 * w + series)
}

/// Closed-form Ohmic correlation function
/// `C(s) = γω_c² [2 Re ψ⁽¹⁾(1/(βω_c) + is/β)/(βω_c)² + 1/(sω_c + i)²]`.
///
/// Only the temperature-independent second term contributes to `Im C(s)`.
pub fn correlation(s: f64, bp: &BathParams) -> Result<Complex64> {
    if !(s >= 0.0) {
        return domain(format!("correlation function needs a lag s >= 0, got {s}"));
    }
    Ok(correlation_unchecked(s, bp))
}

#[inline]
pub(crate) fn correlation_unchecked(s: f64, bp: &BathParams) -> Complex64 {
    let bw = bp.beta * bp.omega_c;
    let thermal = 2.0 * trigamma_unchecked(Complex64::new(1.0 / bw, s / bp.beta)).re / (bw * bw);
    let vacuum = Complex64::new(s * bp.omega_c, 1.0).powi(2).inv();
    bp.gamma * bp.omega_c * bp.omega_c * (vacuum + thermal)
}
