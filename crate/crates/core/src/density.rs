//! 2×2 density matrices tagged with the frame they are expressed in.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Frame (and basis) of a [`DensityMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Adiabatic frame, components in `{|e(t0)⟩, |g(t0)⟩}`.
    Adiabatic,
    /// Lab frame, components in the diabatic basis `{|↑⟩, |↓⟩}`.
    Lab,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    pub matrix: Matrix2<Complex64>,
    pub frame: Frame,
}

const TRACE_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-12;
const NEGATIVITY_TOL: f64 = 1e-6;

impl DensityMatrix {
    /// Wrap a matrix after checking Hermiticity, unit trace and (near) positivity.
    pub fn new(matrix: Matrix2<Complex64>, frame: Frame) -> Result<Self> {
        let rho = Self { matrix, frame };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn new_unchecked(matrix: Matrix2<Complex64>, frame: Frame) -> Self {
        Self { matrix, frame }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn pure(psi: Vector2<Complex64>, frame: Frame) -> Result<Self> {
        let n = psi.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let psi = psi / Complex64::new(n, 0.0);
        Self::new(psi * psi.adjoint(), frame)
    }

    /// Diagonal state with the given populations of the first and second basis state.
    pub fn diagonal(p0: f64, p1: f64, frame: Frame) -> Result<Self> {
        Self::new(
            Matrix2::new(
                Complex64::new(p0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(p1, 0.0),
            ),
            frame,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let lmin = self.eigenvalues()[0];
        if lmin < -NEGATIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lmin:.3e}")));
        }
        Ok(())
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix[(0, 0)] + self.matrix[(1, 1)]
    }

    /// `max |ρ - ρ†|` over entries.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.matrix - self.matrix.adjoint();
        d.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Population of the first basis state (`|e(t0)⟩` or `|↑⟩`).
    pub fn p0(&self) -> f64 {
        self.matrix[(0, 0)].re
    }

    /// Population of the second basis state (`|g(t0)⟩` or `|↓⟩`).
    pub fn p1(&self) -> f64 {
        self.matrix[(1, 1)].re
    }

    /// Off-diagonal element `ρ_01`.
    pub fn coherence(&self) -> Complex64 {
        self.matrix[(0, 1)]
    }
}

/// Eigenvalues of the Hermitian part of a 2×2 matrix, ascending.
pub(crate) fn hermitian_eigenvalues(m: &Matrix2<Complex64>) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b.norm());
    [mean - radius, mean + radius]
}
