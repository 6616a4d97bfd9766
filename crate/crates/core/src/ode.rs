//! Dormand-Prince 5(4) embedded Runge-Kutta integrator with a caller-supplied
//! step-size ceiling.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Steps shorter than this abort the integration.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            min_step: 1e-14,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_calls: usize,
}

/// Integrator state; advance it with [`DormandPrince::advance_to`].
#[derive(Debug, Clone)]
pub struct DormandPrince<const N: usize> {
    t: f64,
    y: [f64; N],
    h: Option<f64>,
    k1: Option<[f64; N]>,
    opts: OdeOptions,
    stats: OdeStats,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(&[f64; N], f64)]) -> [f64; N] {
    let mut out = *y;
    for (k, a) in terms {
        if *a == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * a * k[i];
        }
    }
    out
}

impl<const N: usize> DormandPrince<N> {
    pub fn new(t0: f64, y0: [f64; N], opts: OdeOptions) -> Self {
        Self {
            t: t0,
            y: y0,
            h: None,
            k1: None,
            opts,
            stats: OdeStats::default(),
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64; N] {
        &self.y
    }

    pub fn stats(&self) -> OdeStats {
        self.stats
    }

    /// Integrate forward until `t_end`, landing on it exactly.
    ///
    /// `max_step(t)` bounds the step that starts at `t`.
    pub fn advance_to<F, M>(&mut self, t_end: f64, rhs: &mut F, max_step: &M) -> Result<()>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
        M: Fn(f64) -> f64,
    {
        if t_end < self.t {
            return Err(Error::Contract(format!(
                "cannot integrate backwards from {} to {}",
                self.t, t_end
            )));
        }
        while self.t < t_end {
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(Error::Integration {
                    t: self.t,
                    reason: "step budget exhausted".into(),
                });
            }
            let k1 = match self.k1 {
                Some(k) => k,
                None => {
                    self.stats.rhs_calls += 1;
                    rhs(self.t, &self.y)?
                }
            };
            let cap = max_step(self.t);
            let mut h = self.h.unwrap_or_else(|| self.initial_step(&k1, t_end));
            h = h.min(cap);
            let remaining = t_end - self.t;
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h < self.opts.min_step && !last {
                return Err(Error::Integration {
                    t: self.t,
                    reason: format!("step size underflow (h = {h:.3e})"),
                });
            }

            let (y_new, k7, err) = self.trial_step(rhs, &k1, h)?;
            if err <= 1.0 {
                self.t = if last { t_end } else { self.t + h };
                self.y = y_new;
                self.k1 = Some(k7);
                self.stats.accepted += 1;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // A step clipped to hit `t_end` says little about the natural step size.
                if !last || self.h.is_none() {
                    self.h = Some(h * factor);
                }
            } else {
                self.stats.rejected += 1;
                self.k1 = Some(k1);
                let factor = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                self.h = Some(h * factor);
            }
        }
        Ok(())
    }

    fn initial_step(&self, k1: &[f64; N], t_end: f64) -> f64 {
        let scale = |i: usize| self.opts.abs_tol + self.opts.rel_tol * self.y[i].abs();
        let d0 = (0..N).map(|i| (self.y[i] / scale(i)).powi(2)).sum::<f64>().sqrt();
        let d1 = (0..N).map(|i| (k1[i] / scale(i)).powi(2)).sum::<f64>().sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(t_end - self.t).max(self.opts.min_step)
    }

    fn trial_step<F>(&mut self, rhs: &mut F, k1: &[f64; N], h: f64) -> Result<([f64; N], [f64; N], f64)>
    where
        F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let t = self.t;
        let y = &self.y;
        let k2 = rhs(t + C[1] * h, &axpy(y, h, &[(k1, A2[0])]))?;
        let k3 = rhs(t + C[2] * h, &axpy(y, h, &[(k1, A3[0]), (&k2, A3[1])]))?;
        let k4 = rhs(t + C[3] * h, &axpy(y, h, &[(k1, A4[0]), (&k2, A4[1]), (&k3, A4[2])]))?;
        let k5 = rhs(
            t + C[4] * h,
            &axpy(y, h, &[(k1, A5[0]), (&k2, A5[1]), (&k3, A5[2]), (&k4, A5[3])]),
        )?;
        let k6 = rhs(
            t + C[5] * h,
            &axpy(y, h, &[(k1, A6[0]), (&k2, A6[1]), (&k3, A6[2]), (&k4, A6[3]), (&k5, A6[4])]),
        )?;
        let y_new = axpy(y, h, &[(k1, B[0]), (&k3, B[2]), (&k4, B[3]), (&k5, B[4]), (&k6, B[5])]);
        let k7 = rhs(t + C[6] * h, &y_new)?;
        self.stats.rhs_calls += 6;

        let mut acc = 0.0;
        for i in 0..N {
            let e = h
                * (E[0] * k1[i] + E[2] * k3[i] + E[3] * k4[i] + E[4] * k5[i] + E[5] * k6[i] + E[6] * k7[i]);
            let sc = self.opts.abs_tol + self.opts.rel_tol * y[i].abs().max(y_new[i].abs());
            acc += (e / sc).powi(2);
        }
        let err = (acc / N as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration {
                t,
                reason: "non-finite error estimate".into(),
            });
        }
        Ok((y_new, k7, err))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_long_run() {
        let mut dp = DormandPrince::new(0.0, [1.0, 0.0], OdeOptions::default());
        let mut f = |_t: f64, y: &[f64; 2]| Ok([y[1], -y[0]]);
        dp.advance_to(100.0, &mut f, &|_| f64::INFINITY).unwrap();
        assert_eq!(dp.t(), 100.0);
        assert!((dp.state()[0] - 100f64.cos()).abs() < 1e-6);
        assert!((dp.state()[1] + 100f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn max_step_is_respected() {
        let mut dp = DormandPrince::new(0.0, [0.0], OdeOptions::default());
        let mut f = |_t: f64, _y: &[f64; 1]| Ok([1.0]);
        dp.advance_to(1.0, &mut f, &|_| 0.01).unwrap();
        assert!(dp.stats().accepted >= 100);
        assert!((dp.state()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn time_dependent_rhs() {
        let mut dp = DormandPrince::new(0.0, [0.0], OdeOptions::default());
        let mut f = |t: f64, _y: &[f64; 1]| Ok([t.cos()]);
        for k in 1..=10 {
            dp.advance_to(k as f64, &mut f, &|_| f64::INFINITY).unwrap();
            assert!((dp.state()[0] - (k as f64).sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn underflow_is_reported() {
        let opts = OdeOptions {
            min_step: 1e-3,
            ..Default::default()
        };
        let mut dp = DormandPrince::new(0.0, [1.0], opts);
        // Blows up at t = 1.
        let mut f = |_t: f64, y: &[f64; 1]| Ok([y[0] * y[0]]);
        let err = dp.advance_to(2.0, &mut f, &|_| f64::INFINITY).unwrap_err();
        assert!(matches!(err, Error::Integration { .. }));
    }

    #[test]
    fn backwards_is_rejected() {
        let mut dp = DormandPrince::new(1.0, [1.0], OdeOptions::default());
        let mut f = |_t: f64, y: &[f64; 1]| Ok([y[0]]);
        assert!(dp.advance_to(0.0, &mut f, &|_| 1.0).is_err());
    }
}
