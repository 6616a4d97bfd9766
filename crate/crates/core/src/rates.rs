//! Time-dependent dissipator coefficients `S±(t)`, `Γ±(t)`, `Γ_z(t)`.
//!
//! For transverse coupling
//!
//! ```text
//! Γ±(t) = cos θ_t ∫₀^{t-t0} ds cos θ_{t-s} Re[C(s) e^{±iΔ(t,s)}]
//! S±(t) = cos θ_t ∫₀^{t-t0} ds cos θ_{t-s} Im[C(s) e^{±iΔ(t,s)}]
//! Γ_z(t) = sin θ_t ∫₀^{t-t0} ds sin θ_{t-s} Re[C(s)]
//! ```
//!
//! and for longitudinal coupling `cos θ` and `sin θ` swap roles.
//!
//! The oscillatory `Γ±`/`S±` integrals are cut off smoothly: the integrand
//! is multiplied by a raised-cosine taper that falls from 1 at `s₁ = 8β + 40/ω_c`
//! to 0 at `2s₁`. A hard cut would leave a boundary term of size
//! `|C(s₁)|/(2E)` that oscillates in `t`; with the taper the remainder decays
//! faster than any power of the phase rate. `Γ_z` has no oscillating factor
//! and an algebraic `1/s²` tail, so it is integrated over the full memory.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bath::{bose_occupation, correlation_unchecked, spectral_density};
use crate::error::{domain, Error, Result};
use crate::lzmodel::{delta_phase_unchecked, Coupling, ModelParams};
use crate::quad::{integrate_vec, QuadOptions};

/// Dissipator coefficients at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateSet {
    pub t: f64,
    pub s_plus: f64,
    pub s_minus: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_z: f64,
}

impl RateSet {
    pub fn zero(t: f64) -> Self {
        Self {
            t,
            ..Default::default()
        }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.s_plus, self.s_minus, self.gamma_plus, self.gamma_minus, self.gamma_z]
    }

    fn from_array(t: f64, a: [f64; 5]) -> Self {
        Self {
            t,
            s_plus: a[0],
            s_minus: a[1],
            gamma_plus: a[2],
            gamma_minus: a[3],
            gamma_z: a[4],
        }
    }
}

/// Numerical settings for [`rate_set_with`].
#[derive(Debug, Clone, Copy)]
pub struct RateOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Taper start `s₁ = beta_factor·β + omega_factor/ω_c`.
    pub beta_factor: f64,
    pub omega_factor: f64,
    pub max_panels: usize,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-15,
            beta_factor: 8.0,
            omega_factor: 40.0,
            max_panels: 200_000,
        }
    }
}

impl RateOptions {
    /// Start of the taper applied to the oscillatory memory integrals.
    pub fn taper_start(&self, mp: &ModelParams) -> f64 {
        let bath = mp.bath();
        self.beta_factor * bath.beta() + self.omega_factor / bath.omega_c()
    }
}

/// `(cos θ_x, sin θ_x)`.
#[inline]
fn trig(x: f64, mp: &ModelParams) -> (f64, f64) {
    let e = mp.energy(x);
    (mp.v() * x / e, mp.eps() / e)
}

/// Weights `(relaxation, dephasing)` of the transformed coupling operator.
#[inline]
fn weights(x: f64, mp: &ModelParams) -> (f64, f64) {
    let (c, s) = trig(x, mp);
    match mp.coupling() {
        Coupling::Transverse => (c, s),
        Coupling::Longitudinal => (s, c),
    }
}

#[inline]
fn taper(s: f64, start: f64, end: f64) -> f64 {
    if s <= start {
        1.0
    } else if s >= end {
        0.0
    } else {
        0.5 * (1.0 + (PI * (s - start) / (end - start)).cos())
    }
}

/// Breakpoints for the oscillatory integral: each panel spans at most one
/// period of `e^{iΔ}` and grows geometrically away from `s = 0`.
fn oscillatory_breaks(t: f64, upper: f64, start: f64, mp: &ModelParams) -> Vec<f64> {
    let bath = mp.bath();
    let first = bath.beta().min(1.0 / bath.omega_c()) / 4.0;
    let mut breaks = vec![0.0];
    let mut s = 0.0;
    while s < upper {
        let geometric = first.max(0.5 * s);
        let mut h = geometric.min(PI / mp.energy(t - s));
        h = h.min(PI / mp.energy(t - s - h));
        s = (s + h).min(upper);
        if s < start && s + h > start {
            breaks.push(s);
            s = start;
        }
        breaks.push(s);
    }
    breaks
}

fn geometric_breaks(upper: f64, first: f64, extra: Option<f64>) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut s = first;
    while s < upper {
        breaks.push(s);
        s *= 2.0;
    }
    if let Some(x) = extra {
        if x > 0.0 && x < upper {
            breaks.push(x);
        }
    }
    breaks.push(upper);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

fn check_time(t: f64, mp: &ModelParams) -> Result<()> {
    let slack = 1e-12 * (mp.tf() - mp.t0());
    if !(t >= mp.t0() - slack && t <= mp.tf() + slack) {
        return domain(format!("rates requested at t = {t} outside [{}, {}]", mp.t0(), mp.tf()));
    }
    Ok(())
}

/// Coefficients at `t` with default numerical settings.
pub fn rate_set(t: f64, mp: &ModelParams) -> Result<RateSet> {
    rate_set_with(t, mp, &RateOptions::default())
}

/// Coefficients at `t` by direct quadrature of the memory integrals.
pub fn rate_set_with(t: f64, mp: &ModelParams, opts: &RateOptions) -> Result<RateSet> {
    check_time(t, mp)?;
    let bath = *mp.bath();
    let memory = (t - mp.t0()).max(0.0);
    if bath.gamma() == 0.0 || memory == 0.0 {
        return Ok(RateSet::zero(t));
    }
    let quad = QuadOptions {
        abs_tol: opts.abs_tol,
        rel_tol: opts.rel_tol,
        max_panels: opts.max_panels,
    };

    let start = opts.taper_start(mp);
    let end = 2.0 * start;
    let upper = memory.min(end);
    let breaks = oscillatory_breaks(t, upper, start, mp);
    let osc = integrate_vec(
        |s| {
            let c = correlation_unchecked(s, &bath) * (weights(t - s, mp).0 * taper(s, start, end));
            let (sn, cs) = delta_phase_unchecked(t, s, mp).sin_cos();
            let plus = c * Complex64::new(cs, sn);
            let minus = c * Complex64::new(cs, -sn);
            [plus.re, minus.re, plus.im, minus.im]
        },
        &breaks,
        &quad,
    )?;

    let first = bath.beta().min(1.0 / bath.omega_c()) / 4.0;
    let breaks = geometric_breaks(memory, first, Some(t));
    let deph = integrate_vec(
        |s| [correlation_unchecked(s, &bath).re * weights(t - s, mp).1],
        &breaks,
        &quad,
    )?;

    let (w_relax, w_deph) = weights(t, mp);
    Ok(RateSet {
        t,
        s_plus: w_relax * osc.value[2],
        s_minus: w_relax * osc.value[3],
        gamma_plus: w_relax * osc.value[0],
        gamma_minus: w_relax * osc.value[1],
        gamma_z: w_deph * deph.value[0],
    })
}

/// Quasi-static relaxation rates
/// `Γ₊ = cos²θ_t J(2E_e)[n(2E_e)+1]`, `Γ₋ = cos²θ_t J(2E_e) n(2E_e)`.
///
/// Only `Γ±` are filled in; the shifts and `Γ_z` are left at zero.
pub fn rate_set_adiabatic(t: f64, mp: &ModelParams) -> Result<RateSet> {
    if mp.coupling() != Coupling::Transverse {
        return Err(Error::Contract("adiabatic closed form is derived for transverse coupling".into()));
    }
    let (c, _) = trig(t, mp);
    let gap = 2.0 * mp.energy(t);
    let j = spectral_density(gap, mp.bath())?;
    let n = bose_occupation(gap, mp.bath())?;
    Ok(RateSet {
        gamma_plus: c * c * j * (n + 1.0),
        gamma_minus: c * c * j * n,
        ..RateSet::zero(t)
    })
}

/// Refinement settings for [`build_rate_table`].
#[derive(Debug, Clone, Copy)]
pub struct TableSpec {
    /// Spacing of the starting grid; defaults to `min(τ_LZ/4, (tf-t0)/64)`.
    pub initial_spacing: Option<f64>,
    /// Interpolation tolerance relative to the local value of each coefficient.
    pub rel_tol: f64,
    /// Absolute interpolation allowance as a fraction of the largest
    /// magnitude of each coefficient on the starting grid.
    pub floor_frac: f64,
    pub max_nodes: usize,
    /// Passed through to every direct evaluation.
    pub rates: RateOptions,
}

impl Default for TableSpec {
    fn default() -> Self {
        Self {
            initial_spacing: None,
            rel_tol: 1e-4,
            floor_frac: 1e-7,
            max_nodes: 100_000,
            rates: RateOptions::default(),
        }
    }
}

/// Tabulated coefficients on a strictly increasing grid over `[t0, tf]`
/// with local cubic (4-point Lagrange) interpolation.
#[derive(Debug, Clone)]
pub struct RateTable {
    nodes: Vec<f64>,
    values: Vec<[f64; 5]>,
    max_spacing: f64,
}

impl RateTable {
    /// Table of identically vanishing coefficients.
    pub fn zeros(mp: &ModelParams) -> Self {
        let n = 4;
        let h = (mp.tf() - mp.t0()) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|k| mp.t0() + k as f64 * h).collect();
        nodes[n - 1] = mp.tf();
        Self {
            values: vec![[0.0; 5]; n],
            nodes,
            max_spacing: h,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest node spacing in the table.
    pub fn max_spacing(&self) -> f64 {
        self.max_spacing
    }

    /// Tabulated value at node `i`.
    pub fn node_value(&self, i: usize) -> RateSet {
        RateSet::from_array(self.nodes[i], self.values[i])
    }

    /// Interpolated coefficients at `t`; `t` is clamped into the table range.
    pub fn at(&self, t: f64) -> RateSet {
        RateSet::from_array(t, interpolate(&self.nodes, &self.values, t))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|&x| x == 0.0))
    }
}

fn interpolate(nodes: &[f64], values: &[[f64; 5]], t: f64) -> [f64; 5] {
    let n = nodes.len();
    let t = t.clamp(nodes[0], nodes[n - 1]);
    let i = nodes.partition_point(|&x| x <= t).saturating_sub(1);
    if nodes[i] == t {
        return values[i];
    }
    let j0 = i.saturating_sub(1).min(n - 4);
    let xs = &nodes[j0..j0 + 4];
    let mut out = [0.0; 5];
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (t - xs[b]) / (xs[a] - xs[b]);
            }
        }
        for k in 0..5 {
            out[k] += w * values[j0 + a][k];
        }
    }
    out
}

/// Memory length after which the start-up ringing of `Γ±`, of size about
/// `|C(s)|/(2E_e)`, drops below the table floor. Capped at the taper end.
fn ringing_length(mp: &ModelParams, spec: &TableSpec) -> f64 {
    let bath = mp.bath();
    let wc = bath.omega_c();
    let limit = 2.0 * spec.rates.taper_start(mp);
    // Rough scale of the coefficients themselves.
    let scale = correlation_unchecked(1.0 / wc, bath).norm() / wc;
    let mut s = 1.0 / wc;
    while s < limit {
        let amplitude = correlation_unchecked(s, bath).norm() / (2.0 * mp.energy(mp.t0() + s));
        if amplitude < spec.floor_frac * scale {
            return s;
        }
        s *= 1.25;
    }
    limit
}

/// Tabulate [`rate_set_with`] on an adaptively refined grid.
///
/// Starting from a uniform grid, every interval is probed at its midpoint;
/// where the cubic interpolant misses the direct value by more than the
/// tolerance the midpoint becomes a node and both halves are probed again.
/// Probed midpoints are always kept. Evaluations within a refinement round
/// run in parallel; the result does not depend on the thread count.
pub fn build_rate_table(mp: &ModelParams, spec: &TableSpec) -> Result<RateTable> {
    if mp.bath().gamma() == 0.0 {
        return Ok(RateTable::zeros(mp));
    }
    let span = mp.tf() - mp.t0();
    let h0 = spec
        .initial_spacing
        .unwrap_or_else(|| (mp.tau_lz() / 4.0).min(span / 64.0));
    if !(h0 > 0.0) {
        return domain(format!("table spacing must be > 0, got {h0}"));
    }
    let n0 = ((span / h0).ceil() as usize).max(3) + 1;
    let mut nodes: Vec<f64> = (0..n0).map(|k| mp.t0() + span * k as f64 / (n0 - 1) as f64).collect();
    nodes[n0 - 1] = mp.tf();

    // While the memory is shorter than the taper, the hard cutoff at s = t - t0
    // makes the coefficients ring at the gap frequency 2E_e. Seed the stretch
    // where that ringing exceeds the floor with four nodes per period so
    // bisection does not alias it.
    let transient = ringing_length(mp, spec).min(span);
    let e_max = mp.energy(mp.t0()).max(mp.energy(mp.t0() + transient));
    let h1 = PI / (4.0 * e_max);
    if h1 < h0 {
        let n1 = (transient / h1).ceil() as usize;
        nodes.extend((1..n1).map(|k| mp.t0() + transient * k as f64 / n1 as f64));
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
    }

    let eval = |ts: &[f64]| -> Result<Vec<[f64; 5]>> {
        ts.par_iter()
            .map(|&t| rate_set_with(t, mp, &spec.rates).map(|r| r.to_array()))
            .collect()
    };
    let mut values = eval(&nodes)?;

    let mut floor = [0.0f64; 5];
    for v in &values {
        for k in 0..5 {
            floor[k] = floor[k].max(v[k].abs());
        }
    }
    for f in floor.iter_mut() {
        *f = (*f * spec.floor_frac).max(f64::MIN_POSITIVE);
    }

    // Intervals still to probe, identified by their left endpoint.
    let mut pending: Vec<(f64, f64)> = nodes.windows(2).map(|w| (w[0], w[1])).collect();
    while !pending.is_empty() {
        if nodes.len() + pending.len() > spec.max_nodes {
            return Err(Error::Integration {
                t: pending[0].0,
                reason: format!("coefficient table needs more than {} nodes", spec.max_nodes),
            });
        }
        let mids: Vec<f64> = pending.iter().map(|(a, b)| 0.5 * (a + b)).collect();
        let direct = eval(&mids)?;
        let mut next = Vec::new();
        for ((&(a, b), &m), d) in pending.iter().zip(&mids).zip(&direct) {
            let p = interpolate(&nodes, &values, m);
            let bad = (0..5).any(|k| (d[k] - p[k]).abs() > spec.rel_tol * d[k].abs() + floor[k]);
            if bad && (m - a) > 1e-9 * span {
                next.push((a, m));
                next.push((m, b));
            }
        }
        let mut merged: Vec<(f64, [f64; 5])> = nodes.iter().copied().zip(values.iter().copied()).collect();
        merged.extend(mids.iter().copied().zip(direct));
        merged.sort_by(|x, y| x.0.total_cmp(&y.0));
        merged.dedup_by(|x, y| x.0 == y.0);
        nodes = merged.iter().map(|x| x.0).collect();
        values = merged.iter().map(|x| x.1).collect();
        pending = next;
    }

    let max_spacing = nodes.windows(2).fold(0.0, |m: f64, w| m.max(w[1] - w[0]));
    Ok(RateTable {
        nodes,
        values,
        max_spacing,
    })
}
