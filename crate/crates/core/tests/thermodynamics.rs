mod common;

use common::model;
use dlz_core::propagator::{evolve, thermal_state, uniform_grid};
use dlz_core::thermo::{accumulate, composite_work, von_neumann_entropy};
use dlz_core::{Complex64, Coupling, DensityMatrix, Vector2, EvolutionMode, EvolveOptions, Frame, ModelParams};

#[test]
fn closed_system_exchanges_no_heat() {
    let mp = model(1.0, 5.0, 20.0).with_bath(common::bath(0.0, 5.0));
    let rho0 = thermal_state(mp.t0(), &mp);
    let grid = uniform_grid(&mp, 201).unwrap();
    let traj = evolve(&mp, EvolutionMode::FULL, &rho0, &grid, &EvolveOptions::default()).unwrap();
    let thermo = accumulate(&traj, &mp).unwrap();
    for r in &thermo {
        assert!(r.q.abs() <= 1e-7, "t = {}: Q = {:.3e}", r.t, r.q);
        assert!(r.ds.abs() <= 1e-9);
    }
    assert!(thermo.last().unwrap().ds_irr.abs() <= 1e-6);
}

#[test]
fn adiabatic_ground_state_sweep_does_no_net_work() {
    let bp = common::bath(0.0, 1.0);
    let mp = ModelParams::symmetric(0.01, 1.0, bp, Coupling::Transverse, 20.0).unwrap();
    let frame = dlz_core::lzmodel::eigenframe(mp.t0(), &mp);
    let g = frame.ground.map(|x| Complex64::new(x, 0.0));
    let rho0 = DensityMatrix::pure(Vector2::new(g[0], g[1]), Frame::Lab).unwrap();
    let traj = evolve(&mp, EvolutionMode::FULL, &rho0, &[mp.t0(), mp.tf()], &EvolveOptions::default()).unwrap();
    let thermo = accumulate(&traj, &mp).unwrap();
    assert!(thermo[1].w.abs() <= 1e-4, "W = {}", thermo[1].w);
}

#[test]
fn first_law_closes_on_dissipative_trajectories() {
    for (v, temperature) in [(0.1, 25.0), (1.0, 5.0), (10.0, 100.0)] {
        let mp = model(v, temperature, 40.0);
        let rho0 = thermal_state(mp.t0(), &mp);
        let grid = uniform_grid(&mp, 161).unwrap();
        let traj = evolve(&mp, EvolutionMode::FULL, &rho0, &grid, &EvolveOptions::default()).unwrap();
        let thermo = accumulate(&traj, &mp).unwrap();
        let u0 = thermo[0].u;
        for r in &thermo {
            assert!((r.u - u0 - r.w - r.q).abs() <= 1e-8 * mp.eps());
            assert!(r.s_vn >= 0.0 && r.s_vn <= std::f64::consts::LN_2 + 1e-12);
        }
        assert!(thermo.last().unwrap().ds_irr >= -1e-6);
    }
}

#[test]
fn sampled_work_converges_to_integrated_work() {
    let mp = model(1.0, 5.0, 10.0);
    let rho0 = thermal_state(mp.t0(), &mp);
    let o = EvolveOptions::default();
    let coarse = evolve(&mp, EvolutionMode::FULL, &rho0, &uniform_grid(&mp, 4001).unwrap(), &o).unwrap();
    let fine = evolve(&mp, EvolutionMode::FULL, &rho0, &uniform_grid(&mp, 8001).unwrap(), &o).unwrap();
    let w_coarse = *composite_work(&coarse, &mp).unwrap().last().unwrap();
    let w_fine = *composite_work(&fine, &mp).unwrap().last().unwrap();
    let w_ode = fine.last().unwrap().work;
    assert!((w_coarse - w_fine).abs() <= 1e-6 * mp.eps(), "{w_coarse} vs {w_fine}");
    assert!((w_fine - w_ode).abs() <= 1e-6 * mp.eps(), "{w_fine} vs {w_ode}");
}

#[test]
fn thermal_start_has_gibbs_entropy() {
    let mp = model(1.0, 1.0, 40.0);
    let rho0 = thermal_state(0.0, &mp);
    let e2 = 1f64.exp().powi(2);
    let expected = (1.0 + 1.0 / e2).ln() + 2.0 / (1.0 + e2);
    assert!((von_neumann_entropy(&rho0).unwrap() - expected).abs() < 1e-14);
}
