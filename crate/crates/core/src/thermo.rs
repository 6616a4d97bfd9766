//! Energy and entropy bookkeeping along a trajectory.

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::lzmodel::ModelParams;
use crate::propagator::TrajectoryRecord;

const NEGATIVITY_TOL: f64 = 1e-6;

/// Thermodynamic state at one output time, accumulated from the first record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoRecord {
    pub t: f64,
    /// `U = Tr[ρ H_S]`.
    pub u: f64,
    /// Work done on the system since the first record.
    pub w: f64,
    /// Heat absorbed from the bath, `ΔU - W`.
    pub q: f64,
    /// Von Neumann entropy in nats.
    pub s_vn: f64,
    pub ds: f64,
    /// Entropy flow `Q/T`.
    pub ds_e: f64,
    /// Irreversible entropy production `ΔS - ΔS_e`.
    pub ds_irr: f64,
}

/// `-Σ λ ln λ` with `0 ln 0 = 0`. Eigenvalues slightly below zero are treated as zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let mut s = 0.0;
    for lambda in rho.eigenvalues() {
        if lambda < -NEGATIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lambda:.3e}")));
        }
        if lambda < 0.0 {
            log::debug!("entropy: clamping eigenvalue {lambda:.3e} to zero");
        }
        if lambda > 0.0 {
            s -= lambda * lambda.ln();
        }
    }
    Ok(s)
}

/// `U(t) = Tr[ρ(t) H_S(t)]` for a lab-frame state.
pub fn internal_energy(t: f64, rho: &DensityMatrix, mp: &ModelParams) -> f64 {
    (rho.matrix * mp.hamiltonian(t)).trace().re
}

fn check_monotone(trajectory: &[TrajectoryRecord]) -> Result<()> {
    if trajectory.is_empty() {
        return Err(Error::Contract("empty trajectory".into()));
    }
    if trajectory.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Contract("trajectory times must be strictly increasing".into()));
    }
    Ok(())
}

/// Energy, work, heat and entropy balance at every record.
///
/// Work is the tolerance-controlled integral carried by the propagator.
/// Heat follows from the first law and the entropy flow uses the bath temperature.
pub fn accumulate(trajectory: &[TrajectoryRecord], mp: &ModelParams) -> Result<Vec<ThermoRecord>> {
    check_monotone(trajectory)?;
    let first = &trajectory[0];
    let u0 = internal_energy(first.t, &first.rho_lab, mp);
    let s0 = von_neumann_entropy(&first.rho_lab)?;
    let temperature = mp.bath().temperature();
    trajectory
        .iter()
        .map(|r| {
            let u = internal_energy(r.t, &r.rho_lab, mp);
            let w = r.work - first.work;
            let q = (u - u0) - w;
            let s_vn = von_neumann_entropy(&r.rho_lab)?;
            let ds = s_vn - s0;
            let ds_e = q / temperature;
            Ok(ThermoRecord {
                t: r.t,
                u,
                w,
                q,
                s_vn,
                ds,
                ds_e,
                ds_irr: ds - ds_e,
            })
        })
        .collect()
}

/// Work `∫ v Tr[ρ σ_z] dτ` from the sampled diabatic populations alone.
///
/// Each interval is integrated exactly for the cubic through the four nearest
/// samples, giving a fourth-order rule on nonuniform grids. Needs at least four records.
pub fn composite_work(trajectory: &[TrajectoryRecord], mp: &ModelParams) -> Result<Vec<f64>> {
    check_monotone(trajectory)?;
    let n = trajectory.len();
    if n < 4 {
        return Err(Error::Contract(format!("composite work needs at least 4 samples, got {n}")));
    }
    let ts: Vec<f64> = trajectory.iter().map(|r| r.t).collect();
    let ys: Vec<f64> = trajectory.iter().map(|r| mp.v() * (r.p_up - r.p_down)).collect();
    // Two-point Gauss-Legendre is exact for cubics.
    let g = 0.5 / 3f64.sqrt();
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let lo = i.saturating_sub(1).min(n - 4);
        let (xs, fs) = (&ts[lo..lo + 4], &ys[lo..lo + 4]);
        let (a, b) = (ts[i], ts[i + 1]);
        let (mid, half) = (0.5 * (a + b), b - a);
        acc += 0.5 * half * (lagrange(xs, fs, mid - g * half) + lagrange(xs, fs, mid + g * half));
        out.push(acc);
    }
    Ok(out)
}

fn lagrange(xs: &[f64], fs: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    for (j, (&xj, &fj)) in xs.iter().zip(fs).enumerate() {
        let mut l = 1.0;
        for (k, &xk) in xs.iter().enumerate() {
            if k != j {
                l *= (x - xk) / (xj - xk);
            }
        }
        sum += l * fj;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathParams;
    use crate::density::Frame;
    use crate::lzmodel::Coupling;
    use crate::rates::RateSet;
    use nalgebra::Matrix2;
    use num_complex::Complex64;
    use std::f64::consts::LN_2;

    #[test]
    fn entropy_limits() {
        let pure = DensityMatrix::diagonal(1.0, 0.0, Frame::Lab).unwrap();
        assert_eq!(von_neumann_entropy(&pure).unwrap(), 0.0);
        let mixed = DensityMatrix::diagonal(0.5, 0.5, Frame::Lab).unwrap();
        assert!((von_neumann_entropy(&mixed).unwrap() - LN_2).abs() < 1e-15);
        let slightly_negative = DensityMatrix::diagonal(1.0 + 5e-7, -5e-7, Frame::Lab).unwrap();
        assert!(von_neumann_entropy(&slightly_negative).unwrap().abs() < 1e-5);
        let bad = DensityMatrix {
            matrix: Matrix2::new(
                Complex64::new(1.1, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-0.1, 0.0),
            ),
            frame: Frame::Lab,
        };
        assert!(von_neumann_entropy(&bad).is_err());
    }

    #[test]
    fn thermal_entropy_at_unit_temperature() {
        let e2 = 1f64.exp().powi(2);
        let rho = DensityMatrix::diagonal(1.0 / (1.0 + e2), e2 / (1.0 + e2), Frame::Lab).unwrap();
        let expected = (1.0 + 1.0 / e2).ln() + 2.0 / (1.0 + e2);
        let s = von_neumann_entropy(&rho).unwrap();
        assert!((s - expected).abs() < 1e-14);
        assert!((s - 0.365_334).abs() < 1e-6);
    }

    fn record(t: f64, p_up: f64, work: f64) -> TrajectoryRecord {
        let rho = DensityMatrix::diagonal(p_up, 1.0 - p_up, Frame::Lab).unwrap();
        TrajectoryRecord {
            t,
            rho_adiabatic: rho,
            rho_lab: rho,
            p_up,
            p_down: 1.0 - p_up,
            p_e: p_up,
            p_g: 1.0 - p_up,
            rates: RateSet::zero(t),
            alpha_abs: 0.0,
            work,
        }
    }

    fn model() -> ModelParams {
        let bath = BathParams::new(0.001, 10.0, 2.0).unwrap();
        ModelParams::new(0.5, 1.0, bath, Coupling::Transverse, -4.0, 4.0).unwrap()
    }

    #[test]
    fn first_law_holds_by_construction() {
        let mp = model();
        let traj: Vec<_> = (0..9)
            .map(|k| {
                let t = -4.0 + k as f64;
                record(t, 0.5 + 0.4 * (0.3 * t).sin(), 0.1 * t)
            })
            .collect();
        let thermo = accumulate(&traj, &mp).unwrap();
        let u0 = thermo[0].u;
        for r in &thermo {
            assert!((r.u - u0 - r.w - r.q).abs() < 1e-14);
            assert!((r.ds_e - r.q / 2.0).abs() < 1e-15);
            assert!((r.ds_irr - (r.ds - r.ds_e)).abs() < 1e-15);
            assert!(r.s_vn >= 0.0 && r.s_vn <= LN_2 + 1e-12);
        }
        assert_eq!(thermo[0].w, 0.0);
    }

    #[test]
    fn non_monotone_trajectories_are_rejected() {
        let mp = model();
        let traj = vec![record(0.0, 0.5, 0.0), record(0.0, 0.5, 0.0)];
        assert!(matches!(accumulate(&traj, &mp), Err(Error::Contract(_))));
        assert!(accumulate(&[], &mp).is_err());
        assert!(composite_work(&traj[..1], &mp).is_err());
    }

    #[test]
    fn composite_rule_is_exact_for_cubics() {
        // v (P_up - P_down) = v (2 p_up - 1); choose p_up cubic in t on a nonuniform grid.
        let mp = model();
        let p = |t: f64| 0.5 + 0.001 * (t * t * t - 2.0 * t * t + t);
        let ts = [-4.0, -3.1, -1.7, -0.2, 0.4, 1.9, 2.2, 4.0];
        let traj: Vec<_> = ts.iter().map(|&t| record(t, p(t), 0.0)).collect();
        let w = composite_work(&traj, &mp).unwrap();
        let prim = |t: f64| mp.v() * 0.002 * (t.powi(4) / 4.0 - 2.0 * t.powi(3) / 3.0 + t * t / 2.0);
        for (k, &t) in ts.iter().enumerate() {
            assert!((w[k] - (prim(t) - prim(ts[0]))).abs() < 1e-13, "t = {t}");
        }
    }
}
