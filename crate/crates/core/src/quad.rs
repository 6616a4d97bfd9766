//! Globally adaptive Gauss-Kronrod (10/21-point) quadrature.
//!
//! The integrand may be vector valued (`[f64; N]`), which lets the rate
//! integrals share the expensive correlation-function evaluations across all
//! components. Subdivision always bisects the panel with the largest error
//! estimate, as in QUADPACK's `qag`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_089_412,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances for [`integrate_vec`] and [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Upper bound on the number of panels kept during refinement.
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_panels: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOutput<const N: usize> {
    pub value: [f64; N],
    /// Sum of per-panel error estimates, max-norm over components.
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Panel<N>
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    let mut abs_sum = [0.0; N];
    let mut samples = [[0.0; N]; 21];
    samples[20] = fc;
    for c in 0..N {
        kronrod[c] = WGK[10] * fc[c];
        abs_sum[c] = WGK[10] * fc[c].abs();
    }
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(10).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        samples[2 * j] = f1;
        samples[2 * j + 1] = f2;
        for c in 0..N {
            kronrod[c] += wk * (f1[c] + f2[c]);
            abs_sum[c] += wk * (f1[c].abs() + f2[c].abs());
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * (f1[c] + f2[c]);
            }
        }
    }

    let mut value = [0.0; N];
    let mut error: f64 = 0.0;
    for c in 0..N {
        let mean = 0.5 * kronrod[c];
        let mut asc = WGK[10] * (fc[c] - mean).abs();
        for (j, &wk) in WGK.iter().take(10).enumerate() {
            asc += wk * ((samples[2 * j][c] - mean).abs() + (samples[2 * j + 1][c] - mean).abs());
        }
        let res_abs = abs_sum[c] * half.abs();
        let res_asc = asc * half.abs();
        let mut err = ((kronrod[c] - gauss[c]) * half).abs();
        if res_asc != 0.0 && err != 0.0 {
            err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
        }
        if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * res_abs);
        }
        value[c] = kronrod[c] * half;
        error = error.max(err);
    }
    Panel { a, b, value, error }
}

fn norm_inf<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Integrate a vector-valued function over `[breaks[0], breaks.last()]`.
///
/// `breaks` must be non-decreasing with at least two entries; every
/// consecutive pair starts out as its own panel, which is how callers seed
/// the refinement with known length scales. Zero-width panels are skipped.
pub fn integrate_vec<const N: usize, F>(
    mut f: F,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<QuadOutput<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    if breaks.len() < 2 {
        return Err(Error::Contract("quadrature needs at least two breakpoints".into()));
    }
    if breaks.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Contract("quadrature breakpoints must be non-decreasing".into()));
    }

    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gk21(&mut f, w[0], w[1]));
            evaluations += 21;
        }
    }

    let totals = |heap: &BinaryHeap<Panel<N>>| {
        let mut value = [0.0; N];
        let mut error = 0.0;
        for p in heap.iter() {
            for c in 0..N {
                value[c] += p.value[c];
            }
            error += p.error;
        }
        (value, error)
    };

    let (mut value, mut error) = totals(&heap);
    // Panels too narrow to bisect in floating point are parked here.
    let mut frozen: Vec<Panel<N>> = Vec::new();
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * norm_inf(&value));
        if error <= tol {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b)
            || (worst.b - worst.a) <= 4.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs())
        {
            frozen.push(worst);
            continue;
        }
        if heap.len() + frozen.len() + 2 > opts.max_panels {
            heap.push(worst);
            return Err(Error::Quadrature {
                achieved: error,
                requested: tol,
            });
        }
        let left = gk21(&mut f, worst.a, mid);
        let right = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        for c in 0..N {
            value[c] += left.value[c] + right.value[c] - worst.value[c];
        }
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    heap.extend(frozen);
    let (value, error) = totals(&heap);
    let tol = opts.abs_tol.max(opts.rel_tol * norm_inf(&value));
    if error > tol && error > 1e3 * f64::EPSILON * norm_inf(&value) {
        return Err(Error::Quadrature {
            achieved: error,
            requested: tol,
        });
    }
    Ok(QuadOutput {
        value,
        error,
        evaluations,
    })
}

/// Scalar convenience wrapper around [`integrate_vec`]; returns `(value, error)`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let (lo, hi, sign) = if b >= a { (a, b, 1.0) } else { (b, a, -1.0) };
    let out = integrate_vec(|x| [f(x)], &[lo, hi], opts)?;
    Ok((sign * out.value[0], out.error))
}
