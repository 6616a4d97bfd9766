use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of subdivisions before reaching the requested tolerance.
    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// ODE integration failed at time `t`.
    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    /// A density matrix violates its physical invariants beyond tolerance.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A caller broke an API contract (wrong frame, unsorted grid, ...).
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
