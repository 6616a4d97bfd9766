//! Subcommand execution: single trajectories, sweeps and rate curves.

use std::path::{Path, PathBuf};

use dlz_core::lzmodel::transition_strength;
use dlz_core::propagator::{effective_temperature, evolve};
use dlz_core::rates::rate_set;
use dlz_core::thermo::accumulate;
use dlz_core::{ModelParams, ThermoRecord, TrajectoryRecord};
use rayon::prelude::*;

use crate::config::{Point, RunConfig};
use crate::output::{self, SweepRow};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Full trajectory CSV per point.
    Evolve,
    /// Final transition probability per sweep point.
    Lzprob,
    /// Final entropy balance per sweep point (same schema as `Lzprob`).
    Thermo,
    /// Bath coefficients and `|α_eg|` on the output grid.
    Rates,
}

impl Command {
    /// Half-width of the default window in units of `τ_LZ`.
    pub fn default_window_tau(self) -> f64 {
        match self {
            Command::Lzprob => 100.0,
            _ => 40.0,
        }
    }
}

/// Files written and sweep points that failed.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

pub struct Trajectory {
    pub model: ModelParams,
    pub records: Vec<TrajectoryRecord>,
    pub thermo: Vec<ThermoRecord>,
}

/// Integrate one point without the thermodynamic bookkeeping.
pub fn evolve_point(cfg: &RunConfig, p: Point) -> Result<(ModelParams, Vec<TrajectoryRecord>), HarnessError> {
    let mp = cfg.model(p)?;
    let grid = cfg.output_grid(&mp)?;
    let rho0 = cfg.initial_state(&mp);
    let records = evolve(&mp, cfg.mode(), &rho0, &grid, &cfg.evolve_options())?;
    Ok((mp, records))
}

pub fn run_point(cfg: &RunConfig, p: Point) -> Result<Trajectory, HarnessError> {
    let (model, records) = evolve_point(cfg, p)?;
    let thermo = accumulate(&records, &model)?;
    Ok(Trajectory { model, records, thermo })
}

pub fn trajectory_rows(tr: &Trajectory) -> Vec<Vec<f64>> {
    tr.records
        .iter()
        .zip(&tr.thermo)
        .map(|(r, th)| output::trajectory_row(r, th, &tr.model))
        .collect()
}

/// Final values of one point. When the state leaves the tolerated positivity
/// range the populations are still reported and the entropy columns are NaN.
pub fn sweep_row(cfg: &RunConfig, p: Point) -> SweepRow {
    let (mp, records) = match evolve_point(cfg, p) {
        Ok(r) => r,
        Err(e) => return SweepRow::failed(p.v, cfg.eps, p.temperature, e.to_string()),
    };
    let last = records.last().expect("grid has ≥ 2 points");
    let mut row = SweepRow {
        p_v: last.p_down,
        t_eff_final: effective_temperature(last, &mp).unwrap_or(f64::NAN),
        trajectory_ok: true,
        ..SweepRow::failed(p.v, cfg.eps, p.temperature, String::new())
    };
    match accumulate(&records, &mp) {
        Ok(thermo) => {
            let th = thermo.last().expect("same length");
            (row.ds, row.ds_e, row.ds_irr) = (th.ds, th.ds_e, th.ds_irr);
        }
        Err(e) => row.error = format!("thermodynamics undefined: {e}"),
    }
    row
}

/// All sweep rows in `(v, T)` order, evaluated on the current rayon pool.
pub fn sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let points = cfg.points()?;
    Ok(points.par_iter().map(|&p| sweep_row(cfg, p)).collect())
}

pub fn rate_rows(cfg: &RunConfig, p: Point) -> Result<Vec<Vec<f64>>, HarnessError> {
    let mp = cfg.model(p)?;
    let grid = cfg.output_grid(&mp)?;
    grid.par_iter()
        .map(|&t| Ok(output::rates_row(&rate_set(t, &mp)?, transition_strength(t, &mp), &mp)))
        .collect()
}

fn point_file(dir: &Path, p: Point) -> PathBuf {
    dir.join(format!("v={}_T={}.csv", output::fmt(p.v), output::fmt(p.temperature)))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Run `cmd` on a pool of `workers` threads and write its output under `out`.
///
/// Sweeps write one CSV to `out`. `evolve` and `rates` write `out` for a single
/// point, and one file per point inside the directory `out` otherwise.
pub fn execute(cmd: Command, cfg: &RunConfig, out: &Path, workers: usize) -> Result<Outcome, HarnessError> {
    cfg.validate()?;
    if workers == 0 {
        return Err(HarnessError::Config("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| match cmd {
        Command::Lzprob | Command::Thermo => {
            let rows = sweep(cfg)?;
            let mut failures = Vec::new();
            for r in rows.iter().filter(|r| !r.error.is_empty()) {
                let msg = format!("v = {}, T = {}: {}", r.v, r.temperature, r.error);
                // `lzprob` reports populations; missing entropies do not fail it
                if cmd == Command::Lzprob && r.trajectory_ok {
                    log::warn!("{msg}");
                } else {
                    failures.push(msg);
                }
            }
            write(out, &output::to_csv(&output::SWEEP_HEADER, rows.iter().map(SweepRow::record))?)?;
            Ok(Outcome {
                files: vec![out.to_path_buf()],
                failures,
            })
        }
        Command::Evolve | Command::Rates => {
            let points = cfg.points()?;
            let results: Vec<Result<Vec<u8>, HarnessError>> = points
                .par_iter()
                .map(|&p| {
                    if cmd == Command::Evolve {
                        let tr = run_point(cfg, p)?;
                        output::to_csv(&output::TRAJECTORY_HEADER, output::numeric_rows(&trajectory_rows(&tr)))
                    } else {
                        output::to_csv(&output::RATES_HEADER, output::numeric_rows(&rate_rows(cfg, p)?))
                    }
                })
                .collect();
            if points.len() == 1 {
                let bytes = results.into_iter().next().expect("one result")?;
                write(out, &bytes)?;
                return Ok(Outcome {
                    files: vec![out.to_path_buf()],
                    failures: vec![],
                });
            }
            let mut outcome = Outcome::default();
            for (p, r) in points.iter().zip(results) {
                match r {
                    Ok(bytes) => {
                        let path = point_file(out, *p);
                        write(&path, &bytes)?;
                        outcome.files.push(path);
                    }
                    Err(e) => outcome.failures.push(format!("v = {}, T = {}: {e}", p.v, p.temperature)),
                }
            }
            Ok(outcome)
        }
    })
}
