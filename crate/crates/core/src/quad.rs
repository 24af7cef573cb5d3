//! Adaptive Gauss-Kronrod quadrature.
//!
//! Global strategy: keep a worst-first queue of segments and split the one
//! with the largest error estimate until the summed error meets the
//! requested tolerance. Each segment is evaluated with the embedded
//! 7-point Gauss / 15-point Kronrod pair; the error estimate follows the
//! usual (200·err/resasc)^1.5 rescaling.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

/// Abscissae of the 15-point Kronrod rule on [-1, 1], positive half.
/// Odd entries are the embedded 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// Weights of the 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Weights of the 15-point Kronrod rule.
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const MAX_SEGMENTS: usize = 4096;

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub segments: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
    id: u64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error && self.id == other.id
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // Largest error first; ties broken by insertion id so the pop
        // order (and hence the result) is fully deterministic.
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One Gauss-Kronrod 15-point evaluation of `f` on [a, b].
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, id: u64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut res_gauss = fc * WG[3];
    let mut res_kronrod = fc * WGK[7];
    let mut res_abs = fc.abs() * WGK[7];

    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        let fsum = f1 + f2;
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * fsum;
        }
        res_kronrod += WGK[j] * fsum;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = (res_kronrod - res_gauss) * half;
    Segment {
        a,
        b,
        value: res_kronrod * half,
        error: rescale_error(err, res_abs * half.abs(), res_asc * half.abs()),
        resabs: res_abs * half.abs(),
        id,
    }
}

/// Integrate `f` over [a, b] until `error <= max(abs_tol, rel_tol * |value|)`.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    adaptive_segmented(f, &[a, b], rel_tol, abs_tol)
}

/// As [`adaptive`], but seeded from an initial partition. Useful when the
/// integrand's support is a tiny fraction of the full interval: a single
/// coarse rule would see only zeros and report false convergence.
pub fn adaptive_segmented<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::with_capacity(64);
    let mut next_id = 0_u64;
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut total_resabs = 0.0;

    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        assert!(b >= a, "breaks must be nondecreasing");
        if a == b {
            continue;
        }
        let seg = kronrod15(&f, a, b, next_id);
        next_id += 1;
        total += seg.value;
        total_err += seg.error;
        total_resabs += seg.resabs;
        heap.push(seg);
    }

    loop {
        let tol = abs_tol.max(rel_tol * total.abs());
        if total_err <= tol || total_err <= 100.0 * f64::EPSILON * total_resabs {
            return Ok(QuadResult {
                value: total,
                abs_error: total_err,
                segments: heap.len(),
            });
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::QuadratureNonConvergence {
                value: total,
                error: total_err,
                segments: heap.len(),
                tol,
            });
        }
        let worst = heap.pop().expect("heap nonempty");
        total -= worst.value;
        total_err -= worst.error;
        total_resabs -= worst.resabs;

        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let seg = kronrod15(&f, lo, hi, next_id);
            next_id += 1;
            total += seg.value;
            total_err += seg.error;
            total_resabs += seg.resabs;
            heap.push(seg);
        }
    }
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1],
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            // p0 = P_n(z); derivative from the standard identity.
            let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p0 / dp;
            if (z - z1).abs() < 1e-15 {
                let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
                x[i] = -z;
                x[n - 1 - i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                w[n - 1 - i] = w[i];
                break;
            }
        }
    }
    (x, w)
}

/// Fixed-order Gauss-Legendre integral of `f` over [a, b].
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre_nodes(n);
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for i in 0..n {
        sum += w[i] * f(center + half * x[i]);
    }
    sum * half
}
