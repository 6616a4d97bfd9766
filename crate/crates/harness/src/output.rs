//! CSV schemas. Floats use the shortest representation that round-trips.

use dlz_core::propagator::effective_temperature;
use dlz_core::{ModelParams, RateSet, ThermoRecord, TrajectoryRecord};

use crate::HarnessError;

pub const TRAJECTORY_HEADER: [&str; 24] = [
    "t",
    "t_over_tauLZ",
    "rho_ee_re",
    "rho_gg_re",
    "rho_eg_re",
    "rho_eg_im",
    "P_up",
    "P_down",
    "P_e",
    "P_g",
    "alpha_abs",
    "Gamma_p",
    "Gamma_m",
    "Gamma_z",
    "S_p",
    "S_m",
    "U",
    "W",
    "Q",
    "S_vn",
    "dS",
    "dS_e",
    "dS_irr",
    "T_eff",
];

pub const SWEEP_HEADER: [&str; 11] = [
    "v",
    "v_over_eps2",
    "T",
    "T_over_eps",
    "P_v",
    "P_lz_exact",
    "dS",
    "dS_e",
    "dS_irr",
    "T_eff_final",
    "error",
];

pub const RATES_HEADER: [&str; 8] = [
    "t",
    "t_over_tauLZ",
    "alpha_abs",
    "Gamma_p",
    "Gamma_m",
    "Gamma_z",
    "S_p",
    "S_m",
];

pub fn fmt(x: f64) -> String {
    format!("{x:?}")
}

fn rate_columns(r: &RateSet) -> [f64; 5] {
    [r.gamma_plus, r.gamma_minus, r.gamma_z, r.s_plus, r.s_minus]
}

pub fn trajectory_row(rec: &TrajectoryRecord, th: &ThermoRecord, mp: &ModelParams) -> Vec<f64> {
    let rho = &rec.rho_adiabatic.matrix;
    let t_eff = effective_temperature(rec, mp).unwrap_or(f64::NAN);
    let mut row = vec![
        rec.t,
        rec.t / mp.tau_lz(),
        rho[(0, 0)].re,
        rho[(1, 1)].re,
        rho[(0, 1)].re,
        rho[(0, 1)].im,
        rec.p_up,
        rec.p_down,
        rec.p_e,
        rec.p_g,
        rec.alpha_abs,
    ];
    row.extend(rate_columns(&rec.rates));
    row.extend([th.u, th.w, th.q, th.s_vn, th.ds, th.ds_e, th.ds_irr, t_eff]);
    row
}

pub fn rates_row(r: &RateSet, alpha_abs: f64, mp: &ModelParams) -> Vec<f64> {
    let mut row = vec![r.t, r.t / mp.tau_lz(), alpha_abs];
    row.extend(rate_columns(r));
    row
}

/// One sweep point; `error` is empty on success and the numbers are NaN otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub v: f64,
    pub eps: f64,
    pub temperature: f64,
    pub p_v: f64,
    pub ds: f64,
    pub ds_e: f64,
    pub ds_irr: f64,
    pub t_eff_final: f64,
    pub error: String,
    /// The trajectory itself integrated; only the thermodynamics is missing.
    pub trajectory_ok: bool,
}

impl SweepRow {
    pub fn failed(v: f64, eps: f64, temperature: f64, error: String) -> Self {
        Self {
            v,
            eps,
            temperature,
            p_v: f64::NAN,
            ds: f64::NAN,
            ds_e: f64::NAN,
            ds_irr: f64::NAN,
            t_eff_final: f64::NAN,
            error,
            trajectory_ok: false,
        }
    }

    pub fn record(&self) -> Vec<String> {
        let p_lz = dlz_core::oracles::p_lz_exact(self.v, self.eps);
        let mut out: Vec<String> = [
            self.v,
            self.v / (self.eps * self.eps),
            self.temperature,
            self.temperature / self.eps,
            self.p_v,
            p_lz,
            self.ds,
            self.ds_e,
            self.ds_irr,
            self.t_eff_final,
        ]
        .iter()
        .map(|&x| fmt(x))
        .collect();
        out.push(self.error.clone());
        out
    }
}

/// Serialize a header and rows into CSV bytes.
pub fn to_csv<I>(header: &[&str], rows: I) -> Result<Vec<u8>, HarnessError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| HarnessError::Io(std::io::Error::other(e));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(std::io::Error::other(e.to_string())))
}

pub fn numeric_rows(rows: &[Vec<f64>]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| r.iter().map(|&x| fmt(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1e-300, 123456.789, -2.5e17, 1.0 / 3.0] {
            assert_eq!(fmt(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt(0.1), "0.1");
        assert_eq!(fmt(f64::NAN), "NaN");
        assert_eq!(fmt(f64::INFINITY), "inf");
    }

    #[test]
    fn failed_rows_keep_coordinates() {
        let row = SweepRow::failed(2.0, 1.0, 5.0, "integration failed, at t = 1".into());
        let rec = row.record();
        assert_eq!(rec.len(), SWEEP_HEADER.len());
        assert_eq!(rec[0], "2.0");
        assert_eq!(rec[4], "NaN");
        let bytes = to_csv(&SWEEP_HEADER, [rec]).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("v,v_over_eps2,T,T_over_eps,P_v,P_lz_exact,dS,dS_e,dS_irr,T_eff_final,error\n"));
        assert!(text.contains("\"integration failed, at t = 1\""));
    }
}
