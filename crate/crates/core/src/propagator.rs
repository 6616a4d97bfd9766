//! Master equation in the adiabatic frame and its integration.
//!
//! The state `ρ̃(t)` is expressed in `{|e(t0)⟩, |g(t0)⟩}` and evolves under
//!
//! ```text
//! dρ̃/dt = -i[α_eg σ̂₊ + h.c., ρ̃]                       (nonadiabatic, L₀)
//!        - i[S₊ σ̂₊σ̂₋ + S₋ σ̂₋σ̂₊, ρ̃]
//!        - Γ₊({σ̂₊σ̂₋, ρ̃} - 2σ̂₋ρ̃σ̂₊)
//!        - Γ₋({σ̂₋σ̂₊, ρ̃} - 2σ̂₊ρ̃σ̂₋)
//!        - 2Γ_z(ρ̃ - σ̂_z ρ̃ σ̂_z)                          (dissipation, L_B)
//! ```
//!
//! Lab-frame states follow from `ρ(t) = U(t) ρ̃(t) U†(t)` with
//! `U(t) = Σ_n e^{iη_n(t)} |n(t)⟩⟨n(t0)|`, so `U(t0)` is the identity.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use crate::density::{hermitian_eigenvalues, DensityMatrix, Frame};
use crate::error::{domain, Error, Result};
use crate::lzmodel::{
    eigenframe_with_gauge, nonadiabatic_coupling, transition_strength, ModelParams, PhaseState,
};
use crate::ode::{DormandPrince, OdeOptions};
use crate::rates::{build_rate_table, RateSet, RateTable, TableSpec};

/// Which parts of the generator are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamics {
    /// `L₀ + L_B`.
    Full,
    /// `L₀ = 0`: dissipation only.
    NoNonadiabatic,
    /// `L_B = 0`: unitary Landau-Zener dynamics.
    NoDissipation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvolutionMode {
    pub dynamics: Dynamics,
    /// Keep the `S±` commutator term.
    pub include_lamb_shift: bool,
}

impl EvolutionMode {
    pub const FULL: Self = Self {
        dynamics: Dynamics::Full,
        include_lamb_shift: true,
    };

    pub fn new(dynamics: Dynamics) -> Self {
        Self {
            dynamics,
            include_lamb_shift: true,
        }
    }

    pub fn nonadiabatic(&self) -> bool {
        self.dynamics != Dynamics::NoNonadiabatic
    }

    pub fn dissipative(&self) -> bool {
        self.dynamics != Dynamics::NoDissipation
    }
}

impl Default for EvolutionMode {
    fn default() -> Self {
        Self::FULL
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sigma_plus() -> Matrix2<Complex64> {
    Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
}

fn sigma_minus() -> Matrix2<Complex64> {
    Matrix2::new(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

fn sigma_z() -> Matrix2<Complex64> {
    Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

fn commutator(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix2<Complex64> {
    a * b - b * a
}

fn anticommutator(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix2<Complex64> {
    a * b + b * a
}

/// The generator at one instant: nonadiabatic coupling plus dissipator coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    pub alpha: Complex64,
    pub rates: RateSet,
    pub mode: EvolutionMode,
}

impl Generator {
    /// `L₀[ρ̃] + L_B[ρ̃]` with the disabled parts dropped.
    pub fn apply(&self, rho: &Matrix2<Complex64>) -> Matrix2<Complex64> {
        let minus_i = c(0.0, -1.0);
        let mut out = Matrix2::zeros();
        if self.mode.nonadiabatic() {
            let sp = sigma_plus();
            let h = sp * self.alpha + sp.adjoint() * self.alpha.conj();
            out += commutator(&h, rho) * minus_i;
        }
        if self.mode.dissipative() {
            let r = &self.rates;
            let (sp, sm, sz) = (sigma_plus(), sigma_minus(), sigma_z());
            let pe = sp * sm;
            let pg = sm * sp;
            if self.mode.include_lamb_shift {
                let shift = pe * c(r.s_plus, 0.0) + pg * c(r.s_minus, 0.0);
                out += commutator(&shift, rho) * minus_i;
            }
            out -= (anticommutator(&pe, rho) - sm * rho * sp * c(2.0, 0.0)) * c(r.gamma_plus, 0.0);
            out -= (anticommutator(&pg, rho) - sp * rho * sm * c(2.0, 0.0)) * c(r.gamma_minus, 0.0);
            out -= (rho - sz * rho * sz) * c(2.0 * r.gamma_z, 0.0);
        }
        out
    }
}

/// Generator at time `t`, with coefficients looked up in `rates`.
pub fn generator_at(t: f64, mp: &ModelParams, mode: EvolutionMode, rates: &RateTable) -> Result<Generator> {
    generator_with_gauge(t, mp, mode, rates, false)
}

fn generator_with_gauge(
    t: f64,
    mp: &ModelParams,
    mode: EvolutionMode,
    rates: &RateTable,
    flip_excited: bool,
) -> Result<Generator> {
    let phase = PhaseState::at(t, mp)?;
    let mut alpha = nonadiabatic_coupling(t, mp, &phase);
    if flip_excited {
        alpha = -alpha;
    }
    let rates = if mode.dissipative() { rates.at(t) } else { RateSet::zero(t) };
    Ok(Generator { alpha, rates, mode })
}

/// Right-hand side of the master equation for an adiabatic-frame state.
pub fn rhs(
    t: f64,
    rho: &DensityMatrix,
    mp: &ModelParams,
    mode: EvolutionMode,
    rates: &RateTable,
) -> Result<Matrix2<Complex64>> {
    if rho.frame != Frame::Adiabatic {
        return Err(Error::Contract("master equation acts on adiabatic-frame states".into()));
    }
    Ok(generator_at(t, mp, mode, rates)?.apply(&rho.matrix))
}

/// Columns `e^{iη_e}|e(t)⟩`, `e^{iη_g}|g(t)⟩` in the diabatic basis.
fn frame_unitary(t: f64, mp: &ModelParams, flip_excited: bool) -> Result<Matrix2<Complex64>> {
    let f = eigenframe_with_gauge(t, mp, flip_excited);
    let phase = PhaseState::at(t, mp)?;
    let (s, co) = phase.eta_e().sin_cos();
    let pe = c(co, s);
    let pg = c(co, -s);
    Ok(Matrix2::new(
        pe * f.excited[0],
        pg * f.ground[0],
        pe * f.excited[1],
        pg * f.ground[1],
    ))
}

/// `ρ(t) = U(t) ρ̃(t) U†(t)`.
pub fn to_lab_frame(t: f64, rho: &DensityMatrix, mp: &ModelParams) -> Result<DensityMatrix> {
    to_lab_with_gauge(t, rho, mp, false)
}

fn to_lab_with_gauge(t: f64, rho: &DensityMatrix, mp: &ModelParams, flip: bool) -> Result<DensityMatrix> {
    if rho.frame != Frame::Adiabatic {
        return Err(Error::Contract("expected an adiabatic-frame state".into()));
    }
    let u = frame_unitary(t, mp, flip)?;
    Ok(DensityMatrix::new_unchecked(u * rho.matrix * u.adjoint(), Frame::Lab))
}

/// `ρ̃(t) = U†(t) ρ(t) U(t)`.
pub fn to_adiabatic_frame(t: f64, rho: &DensityMatrix, mp: &ModelParams) -> Result<DensityMatrix> {
    to_adiabatic_with_gauge(t, rho, mp, false)
}

fn to_adiabatic_with_gauge(t: f64, rho: &DensityMatrix, mp: &ModelParams, flip: bool) -> Result<DensityMatrix> {
    if rho.frame != Frame::Lab {
        return Err(Error::Contract("expected a lab-frame state".into()));
    }
    let u = frame_unitary(t, mp, flip)?;
    Ok(DensityMatrix::new_unchecked(u.adjoint() * rho.matrix * u, Frame::Adiabatic))
}

/// Instantaneous Gibbs state `e^{-βH_S(t)}/Z` in the lab frame.
pub fn thermal_state(t: f64, mp: &ModelParams) -> DensityMatrix {
    let f = eigenframe_with_gauge(t, mp, false);
    // p_e = 1/(1 + e^{2βE}) without overflow
    let x = 2.0 * mp.bath().beta() * f.energy_e;
    let p_e = 1.0 / (1.0 + x.exp());
    let p_g = 1.0 / (1.0 + (-x).exp());
    let e = Vector2::new(c(f.excited[0], 0.0), c(f.excited[1], 0.0));
    let g = Vector2::new(c(f.ground[0], 0.0), c(f.ground[1], 0.0));
    let m = e * e.adjoint() * c(p_e, 0.0) + g * g.adjoint() * c(p_g, 0.0);
    DensityMatrix::new_unchecked(m, Frame::Lab)
}

/// Snapshot of a trajectory at one output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    pub rho_adiabatic: DensityMatrix,
    pub rho_lab: DensityMatrix,
    /// Diabatic populations `⟨↑|ρ|↑⟩`, `⟨↓|ρ|↓⟩`.
    pub p_up: f64,
    pub p_down: f64,
    /// Instantaneous eigenstate populations `⟨e(t)|ρ|e(t)⟩`, `⟨g(t)|ρ|g(t)⟩`.
    pub p_e: f64,
    pub p_g: f64,
    /// Coefficients acting at `t` (zero when dissipation is off).
    pub rates: RateSet,
    pub alpha_abs: f64,
    /// `∫_{t0}^t Tr[ρ ∂H_S/∂τ] dτ`, integrated alongside the state.
    pub work: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub ode: OdeOptions,
    pub table: TableSpec,
    /// Integration aborts when `|Tr ρ̃ - 1|` exceeds this.
    pub trace_tol: f64,
    /// Minimum eigenvalues below `-negativity_warn` are logged.
    pub negativity_warn: f64,
    /// Use `-|e(t)⟩` as the excited eigenvector (gauge check).
    pub flip_excited: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            table: TableSpec::default(),
            trace_tol: 1e-7,
            negativity_warn: 1e-6,
            flip_excited: false,
        }
    }
}

/// Integrate from `mp.t0()` and record the state at every `output_grid` time.
pub fn evolve(
    mp: &ModelParams,
    mode: EvolutionMode,
    rho0: &DensityMatrix,
    output_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<TrajectoryRecord>> {
    let table = if mode.dissipative() {
        build_rate_table(mp, &opts.table)?
    } else {
        RateTable::zeros(mp)
    };
    evolve_with_table(mp, mode, rho0, output_grid, &table, opts)
}

fn pack(m: &Matrix2<Complex64>, work: f64) -> [f64; 9] {
    [
        m[(0, 0)].re,
        m[(0, 0)].im,
        m[(0, 1)].re,
        m[(0, 1)].im,
        m[(1, 0)].re,
        m[(1, 0)].im,
        m[(1, 1)].re,
        m[(1, 1)].im,
        work,
    ]
}

fn unpack(y: &[f64; 9]) -> Matrix2<Complex64> {
    Matrix2::new(c(y[0], y[1]), c(y[2], y[3]), c(y[4], y[5]), c(y[6], y[7]))
}

/// As [`evolve`], reusing a prebuilt coefficient table.
pub fn evolve_with_table(
    mp: &ModelParams,
    mode: EvolutionMode,
    rho0: &DensityMatrix,
    output_grid: &[f64],
    table: &RateTable,
    opts: &EvolveOptions,
) -> Result<Vec<TrajectoryRecord>> {
    if rho0.frame != Frame::Lab {
        return Err(Error::Contract("initial state must be given in the lab frame".into()));
    }
    rho0.validate()?;
    validate_grid(output_grid, mp)?;

    let flip = opts.flip_excited;
    let rho_tilde0 = to_adiabatic_with_gauge(mp.t0(), rho0, mp, flip)?;
    let mut solver = DormandPrince::new(mp.t0(), pack(&rho_tilde0.matrix, 0.0), opts.ode);

    let v = mp.v();
    let sz = sigma_z();
    let mut f = |t: f64, y: &[f64; 9]| -> Result<[f64; 9]> {
        let rho = unpack(y);
        let gen = generator_with_gauge(t, mp, mode, table, flip)?;
        let d = gen.apply(&rho);
        let u = frame_unitary(t, mp, flip)?;
        let power = v * (rho * (u.adjoint() * sz * u)).trace().re;
        Ok(pack(&d, power))
    };
    let (tau, wc) = (mp.tau_lz(), mp.bath().omega_c());
    let cap = |t: f64| 0.5 * tau.min(1.0 / wc).min(std::f64::consts::PI / (4.0 * mp.energy(t)));

    let mut records = Vec::with_capacity(output_grid.len());
    for &t_out in output_grid {
        solver
            .advance_to(t_out, &mut f, &cap)
            .map_err(|e| match e {
                Error::Integration { t, reason } => Error::Integration { t, reason },
                other => other,
            })?;
        let y = solver.state();
        let rho_tilde = DensityMatrix::new_unchecked(unpack(y), Frame::Adiabatic);
        let drift = (rho_tilde.trace() - 1.0).norm();
        if drift > opts.trace_tol {
            return Err(Error::Integration {
                t: t_out,
                reason: format!("trace drifted by {drift:.3e}"),
            });
        }
        let lmin = hermitian_eigenvalues(&rho_tilde.matrix)[0];
        if lmin < -opts.negativity_warn {
            log::warn!("t = {t_out}: density matrix eigenvalue {lmin:.3e} below zero");
        }
        let rho_lab = to_lab_with_gauge(t_out, &rho_tilde, mp, flip)?;
        let gen = generator_with_gauge(t_out, mp, mode, table, flip)?;
        records.push(TrajectoryRecord {
            t: t_out,
            rho_adiabatic: rho_tilde,
            rho_lab,
            p_up: rho_lab.p0(),
            p_down: rho_lab.p1(),
            p_e: rho_tilde.p0(),
            p_g: rho_tilde.p1(),
            rates: gen.rates,
            alpha_abs: transition_strength(t_out, mp),
            work: y[8],
        });
    }
    let stats = solver.stats();
    log::debug!(
        "evolve: {} accepted / {} rejected steps, {} rhs calls, {} table nodes",
        stats.accepted,
        stats.rejected,
        stats.rhs_calls,
        table.len()
    );
    Ok(records)
}

fn validate_grid(grid: &[f64], mp: &ModelParams) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Contract("output grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Contract("output grid must be strictly increasing".into()));
    }
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    if lo < mp.t0() || hi > mp.tf() {
        return Err(Error::Contract(format!(
            "output grid [{lo}, {hi}] leaves the window [{}, {}]",
            mp.t0(),
            mp.tf()
        )));
    }
    Ok(())
}

/// Uniform grid of `n ≥ 2` points over `[t0, tf]`.
pub fn uniform_grid(mp: &ModelParams, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Contract(format!("output grid needs at least 2 points, got {n}")));
    }
    let span = mp.tf() - mp.t0();
    let mut g: Vec<f64> = (0..n).map(|k| mp.t0() + span * k as f64 / (n - 1) as f64).collect();
    g[n - 1] = mp.tf();
    Ok(g)
}

/// `T_eff(t) = 2E_e(t)/ln(P_↓/P_↑)`; infinite when the populations are equal.
pub fn effective_temperature(record: &TrajectoryRecord, mp: &ModelParams) -> Result<f64> {
    let (up, down) = (record.p_up, record.p_down);
    if !(up > 0.0 && down > 0.0) {
        return domain(format!(
            "effective temperature needs positive populations, got P_up = {up}, P_down = {down}"
        ));
    }
    if up == down {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 * mp.energy(record.t) / (down / up).ln())
}
