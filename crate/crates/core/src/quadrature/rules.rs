//! 21-point Gauss–Kronrod rule and a deterministic adaptive bisection driver.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

/// Values that can be integrated: reals and complex numbers.
pub trait Quantity: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Quantity for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Quantity for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Weights of the embedded 10-point Gauss rule at `XGK[1], XGK[3], ..., XGK[9]`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Kronrod estimate on `[a, b]` and `|Kronrod − Gauss|`. The rule never
/// evaluates `f` at the interval ends.
pub fn gk21<T: Quantity>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = T::zero();
    for j in 0..10 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron = kron + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).magnitude())
}

pub const GK21_POINTS: usize = 21;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl<T: Quantity> Estimate<T> {
    pub fn zero() -> Self {
        Estimate {
            value: T::zero(),
            error: 0.0,
            evaluations: 0,
            converged: true,
        }
    }

    pub fn combine(self, other: Estimate<T>) -> Estimate<T> {
        Estimate {
            value: self.value + other.value,
            error: self.error + other.error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }

    pub fn scaled(self, s: f64) -> Estimate<T> {
        Estimate {
            value: self.value * s,
            error: self.error * s.abs(),
            ..self
        }
    }
}

/// Globally adaptive bisection on `[a, b]`: the interval with the largest
/// error estimate is split until the summed estimate is at most `tol`.
///
/// Intervals deeper than `max_depth` bisections are never split again; if the
/// target is missed the result is flagged unconverged. Ties are broken by
/// position so the sequence of splits is deterministic.
pub fn adaptive<T: Quantity>(f: &impl Fn(f64) -> T, a: f64, b: f64, tol: f64, max_depth: usize) -> Estimate<T> {
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Leaf<T>> = Vec::new();
    let mut evaluations = 0;
    let mut total_err = 0.0;
    let push = |leaf: Leaf<T>, heap: &mut BinaryHeap<Leaf<T>>, done: &mut Vec<Leaf<T>>| {
        let m = 0.5 * (leaf.a + leaf.b);
        if leaf.depth >= max_depth || m <= leaf.a || m >= leaf.b || leaf.err == 0.0 {
            done.push(leaf);
        } else {
            heap.push(leaf);
        }
    };
    let (value, err) = gk21(f, a, b);
    evaluations += GK21_POINTS;
    total_err += err;
    push(Leaf { a, b, value, err, depth: 0 }, &mut heap, &mut done);
    while total_err > tol && evaluations < MAX_EVALUATIONS {
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        let (lv, le) = gk21(f, worst.a, m);
        let (rv, re) = gk21(f, m, worst.b);
        evaluations += 2 * GK21_POINTS;
        total_err += le + re - worst.err;
        let depth = worst.depth + 1;
        push(Leaf { a: worst.a, b: m, value: lv, err: le, depth }, &mut heap, &mut done);
        push(Leaf { a: m, b: worst.b, value: rv, err: re, depth }, &mut heap, &mut done);
    }
    done.extend(heap.into_vec());
    // sum left to right so the value does not depend on heap layout
    done.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut acc = Estimate::zero();
    let mut mass = 0.0;
    for leaf in &done {
        acc.value = acc.value + leaf.value;
        acc.error += leaf.err;
        mass += leaf.value.magnitude();
    }
    acc.error = acc.error.max(ROUNDOFF_FACTOR * f64::EPSILON * mass);
    acc.evaluations = evaluations;
    acc.converged = acc.error <= tol;
    acc
}

/// Multiple of machine epsilon times the summed panel magnitudes below which
/// an error estimate is not credible.
const ROUNDOFF_FACTOR: f64 = 50.0;

/// Hard cap on integrand evaluations of a single adaptive call.
pub const MAX_EVALUATIONS: usize = 400_000;

struct Leaf<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
    depth: usize,
}

impl<T> PartialEq for Leaf<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T> Eq for Leaf<T> {}

impl<T> PartialOrd for Leaf<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Leaf<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Adaptive integration over consecutive panels `breaks[k]..breaks[k+1]`.
///
/// The tolerance is shared out in proportion to panel width. Panels are
/// processed in parallel, but every panel is integrated sequentially and the
/// partial results are summed in panel order, so the output does not depend
/// on the number of threads.
pub fn adaptive_panels<T, F>(f: &F, breaks: &[f64], tol: f64, max_depth: usize) -> Estimate<T>
where
    T: Quantity,
    F: Fn(f64) -> T + Sync,
{
    if breaks.len() < 2 {
        return Estimate::zero();
    }
    let total = breaks[breaks.len() - 1] - breaks[0];
    if !(total > 0.0) {
        return Estimate::zero();
    }
    let parts: Vec<Estimate<T>> = breaks
        .par_windows(2)
        .map(|w| {
            let width = w[1] - w[0];
            if width <= 0.0 {
                Estimate::zero()
            } else {
                adaptive(f, w[0], w[1], tol * width / total, max_depth)
            }
        })
        .collect();
    parts.into_iter().fold(Estimate::zero(), Estimate::combine)
}

/// Sorted, deduplicated breakpoints: `n` uniform panels on `[a, b]` merged
/// with the extra points that fall strictly inside.
pub fn panel_breaks(a: f64, b: f64, n: usize, extra: &[f64]) -> Vec<f64> {
    let n = n.max(1);
    let mut pts: Vec<f64> = (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect();
    pts.extend(extra.iter().copied().filter(|x| *x > a && *x < b));
    pts.sort_by(f64::total_cmp);
    let scale = (b - a).abs().max(1.0);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * scale);
    // dedup may drop an exact endpoint; restore it
    pts[0] = a;
    let last = pts.len() - 1;
    pts[last] = b;
    pts
}
