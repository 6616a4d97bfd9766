//! Nonadiabatic dynamics and finite-time thermodynamics of a linearly driven
//! two-level system weakly coupled to an Ohmic bosonic bath.
//!
//! The master equation is integrated in the adiabatic frame, where the
//! Landau-Zener transition appears as the residual Hamiltonian
//! `α_eg(t) σ̂₊ + h.c.` and the bath enters through five time-dependent
//! coefficients obtained from memory integrals over the bath correlation
//! function.
//!
//! Units: `ħ = k_B = 1`; energies are usually expressed in units of the
//! tunneling amplitude `ε`.

pub mod bath;
pub mod density;
pub mod error;
pub mod lzmodel;
pub mod ode;
pub mod oracles;
pub mod propagator;
pub mod quad;
pub mod rates;
pub mod thermo;

pub use bath::BathParams;
pub use density::{DensityMatrix, Frame};
pub use error::{Error, Result};
pub use lzmodel::{Coupling, EigenFrame, ModelParams, PhaseState};
pub use propagator::{Dynamics, EvolutionMode, EvolveOptions, TrajectoryRecord};
pub use rates::{RateOptions, RateSet, RateTable, TableSpec};
pub use thermo::ThermoRecord;

pub use nalgebra::{Matrix2, Vector2};
pub use num_complex::Complex64;
