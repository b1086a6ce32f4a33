//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands on a finite interval.
//!
//! The interval is first cut into `initial_panels` equal panels (callers use
//! this to resolve oscillations), then the panel with the largest error
//! estimate is bisected until the summed estimate meets the tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

#[allow(clippy::excessive_precision)]
const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the centre.
#[allow(clippy::excessive_precision)]
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const K: usize> {
    pub value: [f64; K],
    /// Sum over panels of the max-norm Kronrod–Gauss difference.
    pub est_error: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<const K: usize> {
    lo: f64,
    hi: f64,
    value: [f64; K],
    error: f64,
}

impl<const K: usize> PartialEq for Panel<K> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<const K: usize> Eq for Panel<K> {}

impl<const K: usize> PartialOrd for Panel<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<const K: usize> Ord for Panel<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn kronrod_panel<const K: usize, F: Fn(f64) -> [f64; K]>(f: &F, lo: f64, hi: f64) -> Panel<K> {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kronrod = [0.0; K];
    let mut gauss = [0.0; K];
    let mid = f(centre);
    for c in 0..K {
        kronrod[c] = KRONROD_WEIGHTS[7] * mid[c];
        gauss[c] = GAUSS_WEIGHTS[3] * mid[c];
    }
    for j in 0..7 {
        let dx = half * KRONROD_NODES[j];
        let left = f(centre - dx);
        let right = f(centre + dx);
        for c in 0..K {
            let pair = left[c] + right[c];
            kronrod[c] += KRONROD_WEIGHTS[j] * pair;
            if j % 2 == 1 {
                gauss[c] += GAUSS_WEIGHTS[j / 2] * pair;
            }
        }
    }
    let mut error = 0.0f64;
    for c in 0..K {
        kronrod[c] *= half;
        gauss[c] *= half;
        error = error.max((kronrod[c] - gauss[c]).abs());
    }
    if !error.is_finite() {
        error = f64::INFINITY;
    }
    Panel { lo, hi, value: kronrod, error }
}

fn max_norm<const K: usize>(v: &[f64; K]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Integrates `f` over `[a, b]`.
///
/// Converges when the summed error estimate is at most
/// `max(tol.abs, tol.rel·‖I‖∞)`. Panels narrower than a few ulps of their
/// position are no longer split.
pub fn integrate<const K: usize, F>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    tol: Tolerance,
    max_subdivisions: usize,
) -> Result<Integral<K>>
where
    F: Fn(f64) -> [f64; K],
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::invalid("interval", format!("need finite a <= b, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral { value: [0.0; K], est_error: 0.0, subdivisions: 0, evaluations: 0 });
    }
    let panels = initial_panels.max(1);
    let width = (b - a) / panels as f64;
    let mut heap = BinaryHeap::with_capacity(panels * 2);
    let mut settled: Vec<Panel<K>> = Vec::new();
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { a + width * (i + 1) as f64 };
        heap.push(kronrod_panel(&f, lo, hi));
    }
    let mut evaluations = 15 * panels;
    let mut subdivisions = 0;

    let totals = |heap: &BinaryHeap<Panel<K>>, settled: &[Panel<K>]| {
        let mut value = [CompensatedSum::default(); K];
        let mut error = CompensatedSum::default();
        for p in heap.iter().chain(settled.iter()) {
            for (acc, v) in value.iter_mut().zip(p.value) {
                acc.add(v);
            }
            error.add(p.error);
        }
        (value.map(|s| s.value()), error.value())
    };

    let (mut value, mut error) = totals(&heap, &settled);
    loop {
        let target = tol.abs.max(tol.rel * max_norm(&value));
        if error <= target {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        let resolution = 4.0 * f64::EPSILON * worst.lo.abs().max(worst.hi.abs()).max(f64::MIN_POSITIVE);
        if worst.hi - worst.lo <= resolution || mid <= worst.lo || mid >= worst.hi {
            settled.push(worst);
            continue;
        }
        if subdivisions >= max_subdivisions {
            heap.push(worst);
            return Err(Error::ToleranceNotMet { subdivisions, est_error: error });
        }
        let left = kronrod_panel(&f, worst.lo, mid);
        let right = kronrod_panel(&f, mid, worst.hi);
        evaluations += 30;
        subdivisions += 1;
        for (c, v) in value.iter_mut().enumerate() {
            *v += left.value[c] + right.value[c] - worst.value[c];
        }
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if subdivisions % 256 == 0 {
            (value, error) = totals(&heap, &settled);
        }
    }

    // Final sum in interval order so the result does not depend on heap layout.
    let mut all: Vec<Panel<K>> = heap.into_vec();
    all.extend(settled);
    all.sort_by(|p, q| p.lo.total_cmp(&q.lo));
    let mut value = [CompensatedSum::default(); K];
    let mut error = CompensatedSum::default();
    for p in &all {
        for (acc, v) in value.iter_mut().zip(p.value) {
            acc.add(v);
        }
        error.add(p.error);
    }
    let est_error = error.value();
    let value = value.map(|s| s.value());
    if !est_error.is_finite() || value.iter().any(|v| !v.is_finite()) {
        return Err(Error::ToleranceNotMet { subdivisions, est_error });
    }
    Ok(Integral { value, est_error, subdivisions, evaluations })
}
