//! Run configuration: a JSON object with optional `--set key=value` overrides.
//!
//! Energies are in units of the tunneling amplitude unless `eps` is changed;
//! times in the window keys are in units of `τ_LZ = ε/v`.

use std::path::Path;

use dlz_core::propagator::{thermal_state, uniform_grid};
use dlz_core::{
    BathParams, Coupling, DensityMatrix, Dynamics, EvolutionMode, EvolveOptions, Frame, ModelParams, TableSpec,
};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    Transverse,
    Longitudinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Full,
    NoNonadiabatic,
    NoDissipation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Diabatic `|↑⟩`.
    Up,
    /// Diabatic `|↓⟩`.
    Down,
    /// Instantaneous Gibbs state of `H_S(t0)` at the bath temperature.
    Gibbs,
}

/// Values along one sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    /// `[min, max, n]`, logarithmically spaced.
    Log { log: (f64, f64, usize) },
    /// `[min, max, n]`, evenly spaced.
    Linear { linear: (f64, f64, usize) },
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>, HarnessError> {
        let spaced = |(lo, hi, n): (f64, f64, usize), log: bool| {
            if n == 0 || !(lo.is_finite() && hi.is_finite()) || (log && !(lo > 0.0 && hi > 0.0)) {
                return Err(HarnessError::Config(format!("invalid grid [{lo}, {hi}, {n}]")));
            }
            if n == 1 {
                return Ok(vec![lo]);
            }
            Ok((0..n)
                .map(|k| {
                    let x = k as f64 / (n - 1) as f64;
                    if k == n - 1 {
                        hi
                    } else if log {
                        lo * (hi / lo).powf(x)
                    } else {
                        lo + (hi - lo) * x
                    }
                })
                .collect())
        };
        let out = match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Log { log } => spaced(*log, true)?,
            GridSpec::Linear { linear } => spaced(*linear, false)?,
        };
        if out.is_empty() {
            return Err(HarnessError::Config("sweep grid is empty".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    /// Sweep velocities; defaults to the single `v`.
    pub v: Option<GridSpec>,
    /// Bath temperatures; defaults to the single `temperature`.
    pub temperature: Option<GridSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Sweep velocity (energy²).
    pub v: f64,
    /// Tunneling amplitude (energy).
    pub eps: f64,
    /// Dimensionless system-bath coupling strength.
    pub gamma: f64,
    /// Bath cutoff frequency (energy).
    pub omega_c: f64,
    /// Bath temperature (energy).
    pub temperature: f64,
    pub coupling: CouplingKind,
    /// Start and end of the window in units of `τ_LZ`.
    pub t0_tau: f64,
    pub tf_tau: f64,
    pub mode: ModeKind,
    /// Keep the bath-induced level shifts in the generator.
    pub lamb_shift: bool,
    pub initial_state: InitialState,
    /// Number of evenly spaced output times over the window (≥ 2).
    pub points: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Integrator step budget per trajectory.
    pub max_steps: usize,
    /// Relative interpolation tolerance of the coefficient table.
    pub table_rel_tol: f64,
    pub sweep: SweepSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ode = dlz_core::ode::OdeOptions::default();
        Self {
            v: 1.0,
            eps: 1.0,
            gamma: 0.001,
            omega_c: 10.0,
            temperature: 1.0,
            coupling: CouplingKind::Transverse,
            t0_tau: -40.0,
            tf_tau: 40.0,
            mode: ModeKind::Full,
            lamb_shift: true,
            initial_state: InitialState::Up,
            points: 401,
            rel_tol: ode.rel_tol,
            abs_tol: ode.abs_tol,
            max_steps: ode.max_steps,
            table_rel_tol: TableSpec::default().rel_tol,
            sweep: SweepSpec::default(),
        }
    }
}

/// One `(v, T)` point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub v: f64,
    pub temperature: f64,
}

impl RunConfig {
    /// Read a config file (if any), apply overrides and validate.
    ///
    /// A window missing from both file and overrides defaults to `±default_window_tau`.
    pub fn load(path: Option<&Path>, overrides: &[String], default_window_tau: f64) -> Result<Self, HarnessError> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))?
            }
            None => Value::Object(Map::new()),
        };
        if let Some(obj) = value.as_object_mut() {
            obj.entry("t0_tau").or_insert(Value::from(-default_window_tau));
            obj.entry("tf_tau").or_insert(Value::from(default_window_tau));
        }
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Check everything that can be checked before any computation.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.points < 2 {
            return Err(HarnessError::Config(format!(
                "output grid is empty: `points` must be at least 2, got {}",
                self.points
            )));
        }
        if !(self.t0_tau < 0.0 && self.tf_tau > 0.0) {
            return Err(HarnessError::Config(format!(
                "window must satisfy t0_tau < 0 < tf_tau, got [{}, {}]",
                self.t0_tau, self.tf_tau
            )));
        }
        for (name, x) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol), ("table_rel_tol", self.table_rel_tol)] {
            if !(x > 0.0 && x < 1.0) {
                return Err(HarnessError::Config(format!("{name} must lie in (0, 1), got {x}")));
            }
        }
        if self.max_steps == 0 {
            return Err(HarnessError::Config("max_steps must be at least 1".into()));
        }
        for p in self.points()? {
            self.model(p)?;
        }
        Ok(())
    }

    /// Sweep points ordered by `(v, T)`.
    pub fn points(&self) -> Result<Vec<Point>, HarnessError> {
        let vs = match &self.sweep.v {
            Some(g) => g.values()?,
            None => vec![self.v],
        };
        let ts = match &self.sweep.temperature {
            Some(g) => g.values()?,
            None => vec![self.temperature],
        };
        let mut out: Vec<Point> = vs
            .iter()
            .flat_map(|&v| ts.iter().map(move |&temperature| Point { v, temperature }))
            .collect();
        out.sort_by(|a, b| a.v.total_cmp(&b.v).then(a.temperature.total_cmp(&b.temperature)));
        out.dedup();
        Ok(out)
    }

    pub fn model(&self, p: Point) -> Result<ModelParams, HarnessError> {
        let bath = BathParams::new(self.gamma, self.omega_c, p.temperature).map_err(config_err)?;
        let coupling = match self.coupling {
            CouplingKind::Transverse => Coupling::Transverse,
            CouplingKind::Longitudinal => Coupling::Longitudinal,
        };
        if !(p.v > 0.0) {
            return Err(HarnessError::Config(format!("sweep velocity must be > 0, got {}", p.v)));
        }
        let tau = self.eps / p.v;
        ModelParams::new(p.v, self.eps, bath, coupling, self.t0_tau * tau, self.tf_tau * tau).map_err(config_err)
    }

    pub fn mode(&self) -> EvolutionMode {
        let dynamics = match self.mode {
            ModeKind::Full => Dynamics::Full,
            ModeKind::NoNonadiabatic => Dynamics::NoNonadiabatic,
            ModeKind::NoDissipation => Dynamics::NoDissipation,
        };
        EvolutionMode {
            dynamics,
            include_lamb_shift: self.lamb_shift,
        }
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        let mut o = EvolveOptions::default();
        o.ode.rel_tol = self.rel_tol;
        o.ode.abs_tol = self.abs_tol;
        o.ode.max_steps = self.max_steps;
        o.table.rel_tol = self.table_rel_tol;
        o
    }

    pub fn initial_state(&self, mp: &ModelParams) -> DensityMatrix {
        match self.initial_state {
            InitialState::Up => DensityMatrix::diagonal(1.0, 0.0, Frame::Lab).expect("valid"),
            InitialState::Down => DensityMatrix::diagonal(0.0, 1.0, Frame::Lab).expect("valid"),
            InitialState::Gibbs => thermal_state(mp.t0(), mp),
        }
    }

    pub fn output_grid(&self, mp: &ModelParams) -> Result<Vec<f64>, HarnessError> {
        uniform_grid(mp, self.points).map_err(config_err)
    }
}

fn config_err(e: dlz_core::Error) -> HarnessError {
    HarnessError::Config(e.to_string())
}

/// Set a dotted key such as `sweep.v` to a JSON value (bare words become strings).
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), HarnessError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| HarnessError::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(HarnessError::Config(format!("override `{assignment}` has an empty key")));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| HarnessError::Config(format!("cannot set `{key}`: parent is not an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("split always yields at least one part")
}
