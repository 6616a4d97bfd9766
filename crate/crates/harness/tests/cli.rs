use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dlz_core::oracles::{unitary_trajectory, UnitaryOptions};
use dlz_core::{Complex64, Vector2};
use dlz_harness::output::{RATES_HEADER, SWEEP_HEADER, TRAJECTORY_HEADER};
use dlz_harness::RunConfig;

fn dlz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlz"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = dlz(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../figures").join(name)
}

/// Header and rows as parsed floats (the `error` column of sweeps is kept apart).
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>, Vec<String>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for rec in r.records() {
        let rec = rec.unwrap();
        let mut row = Vec::new();
        for (name, field) in header.iter().zip(rec.iter()) {
            if name == "error" {
                errors.push(field.to_string());
            } else {
                row.push(field.parse::<f64>().unwrap());
            }
        }
        rows.push(row);
    }
    (header, rows, errors)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn evolve_writes_trajectory_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    run_ok(&["evolve", "--set", "v=2", "--set", "temperature=5", "--set", "points=51", "--out", out.to_str().unwrap()]);
    let (header, rows, _) = read_csv(&out);
    assert_eq!(header, TRAJECTORY_HEADER);
    assert_eq!(rows.len(), 51);
    let (t, tt) = (col(&header, "t"), col(&header, "t_over_tauLZ"));
    assert!((rows[0][tt] + 40.0).abs() < 1e-12 && (rows[50][tt] - 40.0).abs() < 1e-12);
    assert!((rows[0][t] + 20.0).abs() < 1e-12);
    for r in &rows {
        let (up, down) = (r[col(&header, "P_up")], r[col(&header, "P_down")]);
        assert!((up + down - 1.0).abs() < 1e-8);
        let (ee, gg) = (r[col(&header, "rho_ee_re")], r[col(&header, "rho_gg_re")]);
        assert_eq!((ee, gg), (r[col(&header, "P_e")], r[col(&header, "P_g")]));
    }
}

#[test]
fn slow_hot_sweep_leaves_population_behind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig3a.csv");
    run_ok(&[
        "evolve",
        "--config",
        fixture("fig3.json").to_str().unwrap(),
        "--set",
        "sweep.v=[0.1]",
        "--set",
        "sweep.temperature=[25]",
        "--out",
        out.to_str().unwrap(),
    ]);
    let (header, rows, _) = read_csv(&out);
    let p_down = rows.last().unwrap()[col(&header, "P_down")];
    assert!(p_down < 1.0 && p_down > 0.5, "{p_down}");
}

#[test]
fn closed_evolution_matches_schrodinger_solver() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.csv");
    run_ok(&[
        "evolve",
        "--set",
        "v=1.5",
        "--set",
        "mode=no_dissipation",
        "--set",
        "t0_tau=-30",
        "--set",
        "tf_tau=30",
        "--set",
        "points=61",
        "--out",
        out.to_str().unwrap(),
    ]);
    let (header, rows, _) = read_csv(&out);
    let times: Vec<f64> = rows.iter().map(|r| r[col(&header, "t")]).collect();
    let psi0 = Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let states = unitary_trajectory(1.5, 1.0, psi0, times[0], &times, &UnitaryOptions::default()).unwrap();
    for (r, psi) in rows.iter().zip(&states) {
        assert!((r[col(&header, "P_down")] - psi[1].norm_sqr()).abs() <= 1e-6);
        for name in ["Gamma_p", "Gamma_m", "Gamma_z", "S_p", "S_m"] {
            assert_eq!(r[col(&header, name)], 0.0, "{name}");
        }
        // no heat without a bath, up to the integrator tolerance on U - W
        assert!(r[col(&header, "Q")].abs() <= 1e-8 * r[col(&header, "U")].abs().max(1.0));
    }
}

#[test]
fn rates_schema_peak_and_vanishing_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    run_ok(&["rates", "--set", "v=3", "--set", "gamma=0", "--set", "points=41", "--out", out.to_str().unwrap()]);
    let (header, rows, _) = read_csv(&out);
    assert_eq!(header, RATES_HEADER);
    for r in &rows {
        assert!(r[3..].iter().all(|&x| x == 0.0));
    }
    let a = col(&header, "alpha_abs");
    let peak = rows.iter().max_by(|x, y| x[a].total_cmp(&y[a])).unwrap();
    assert!(peak[col(&header, "t")].abs() < 1e-12);
    assert!((peak[a] - 1.5).abs() <= 1e-9);

    run_ok(&["rates", "--set", "v=1", "--set", "temperature=25", "--set", "points=41", "--out", out.to_str().unwrap()]);
    let (header, rows, _) = read_csv(&out);
    let g = col(&header, "Gamma_p");
    // relaxation dips at the crossing
    let mid = rows.len() / 2;
    assert!(rows[mid][g] < rows[mid - 4][g] && rows[mid][g] < rows[mid + 4][g]);
}

#[test]
fn sweep_rows_equal_single_runs() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("s.csv");
    let common = ["--set", "t0_tau=-15", "--set", "tf_tau=15", "--set", "points=31", "--set", "initial_state=gibbs"];
    let mut args = vec!["thermo", "--set", "sweep.v=[4, 1.5]", "--set", "sweep.temperature=[2]", "--out"];
    args.push(sweep.to_str().unwrap());
    args.extend(common);
    run_ok(&args);
    let (header, rows, errors) = read_csv(&sweep);
    assert_eq!(header, SWEEP_HEADER);
    assert_eq!(rows.len(), 2);
    assert!(errors.iter().all(String::is_empty));
    // sorted by v
    assert!(rows[0][0] < rows[1][0]);

    for row in &rows {
        let single = dir.path().join("one.csv");
        let v = format!("v={}", row[0]);
        let mut args = vec!["evolve", "--set", &v, "--set", "temperature=2", "--out"];
        args.push(single.to_str().unwrap());
        args.extend(common);
        run_ok(&args);
        let (th, tr, _) = read_csv(&single);
        let last = tr.last().unwrap();
        for (s, t) in [("P_v", "P_down"), ("dS", "dS"), ("dS_e", "dS_e"), ("dS_irr", "dS_irr"), ("T_eff_final", "T_eff")] {
            let (a, b) = (row[col(&header, s)], last[col(&th, t)]);
            assert!((a - b).abs() <= 1e-12, "{s}: {a} vs {b}");
        }
        assert_eq!(row[col(&header, "P_lz_exact")], dlz_core::oracles::p_lz_exact(row[0], 1.0));
    }
}

#[test]
fn multi_point_evolve_writes_one_file_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj");
    run_ok(&[
        "evolve",
        "--set",
        "sweep.v=[2, 8]",
        "--set",
        "t0_tau=-10",
        "--set",
        "tf_tau=10",
        "--set",
        "points=11",
        "--out",
        out.to_str().unwrap(),
    ]);
    for name in ["v=2.0_T=1.0.csv", "v=8.0_T=1.0.csv"] {
        let (header, rows, _) = read_csv(&out.join(name));
        assert_eq!(header, TRAJECTORY_HEADER);
        assert_eq!(rows.len(), 11);
    }
}

#[test]
fn config_errors_exit_with_code_2_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("none.csv");
    let o = out.to_str().unwrap();
    for args in [
        vec!["evolve", "--set", "points=0", "--out", o],
        vec!["lzprob", "--set", "sweep.v=[]", "--out", o],
        vec!["thermo", "--set", "typo=1", "--out", o],
        vec!["rates", "--set", "temperature=-1", "--out", o],
        vec!["evolve", "--config", "/nonexistent/cfg.json", "--out", o],
        vec!["evolve", "--workers", "0", "--out", o],
    ] {
        let res = dlz(&args);
        assert_eq!(res.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&res.stderr).contains("configuration error"));
        assert!(!out.exists(), "{args:?} wrote a file");
    }
}

#[test]
fn integration_failure_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fail.csv");
    let res = dlz(&["evolve", "--set", "mode=no_dissipation", "--set", "max_steps=20", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&res.stderr);
    assert!(msg.contains("numerical failure") && msg.contains("t = "), "{msg}");
    assert!(!out.exists());

    // in a sweep the failing point is recorded and the others still run
    let res = dlz(&[
        "lzprob",
        "--set",
        "gamma=0",
        "--set",
        "sweep.v=[0.2, 20]",
        "--set",
        "max_steps=500",
        "--set",
        "t0_tau=-10",
        "--set",
        "tf_tau=10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3));
    let (header, rows, errors) = read_csv(&out);
    assert_eq!(rows.len(), 2);
    assert!(!errors[0].is_empty() && rows[0][col(&header, "P_v")].is_nan());
    assert!(errors[1].is_empty() && rows[1][col(&header, "P_v")].is_finite());
}

#[test]
fn fixture_configs_round_trip() {
    for k in 2..=7 {
        let path = fixture(&format!("fig{k}.json"));
        let cfg = RunConfig::load(Some(&path), &[], 40.0).unwrap();
        let back: RunConfig = serde_json::from_str(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg, "fig{k}");
        assert_eq!((cfg.gamma, cfg.omega_c, cfg.eps), (0.001, 10.0, 1.0));
    }
}

#[test]
fn lost_positivity_keeps_populations_but_not_entropies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cold.csv");
    let o = out.to_str().unwrap();
    let args = ["--set", "v=0.1", "--set", "temperature=0.1", "--set", "t0_tau=-20", "--set", "tf_tau=20", "--out", o];
    let res = dlz(&[&["lzprob"][..], &args].concat());
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let (header, rows, errors) = read_csv(&out);
    assert!(rows[0][col(&header, "P_v")] > 0.99);
    assert!(rows[0][col(&header, "dS_irr")].is_nan());
    assert!(errors[0].contains("negative eigenvalue"), "{}", errors[0]);

    let res = dlz(&[&["thermo"][..], &args].concat());
    assert_eq!(res.status.code(), Some(3));
    assert_eq!(read_csv(&out).2, errors);
}
