//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! The error estimate follows the QUADPACK `qk15` heuristics, including the
//! round-off floor of `50·ε·∫|f|` per panel. That floor is what lets callers
//! detect integrals whose value is swamped by cancellation: the requested
//! tolerance simply cannot be met, and the integrator reports it instead of
//! returning noise.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and budget for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_panels: usize,
}

impl<T: Real> QuadConfig<T> {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol: T::lit(abs_tol),
            rel_tol: T::lit(rel_tol),
            max_panels: 2000,
        }
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }
}

/// Outcome of a converged integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub value: T,
    pub abs_error: T,
    /// `∫|f|` over the same range; its ratio to `|value|` measures cancellation.
    pub abs_value: T,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
    abs_value: T,
    floor: T,
}

impl<T: Real> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Real> Eq for Panel<T> {}
impl<T: Real> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Real> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
    }
}

fn kronrod15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> Panel<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let abs_half = half_len.abs();

    let fc = f(center);
    let mut res_g = fc * T::lit(WG[3]);
    let mut res_k = fc * T::lit(WGK[7]);
    let mut res_abs = fc.abs() * T::lit(WGK[7]);
    let mut f1 = [T::zero(); 7];
    let mut f2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let lo = f(center - dx);
        let hi = f(center + dx);
        f1[j] = lo;
        f2[j] = hi;
        let w = T::lit(WGK[j]);
        res_k = res_k + w * (lo + hi);
        res_abs = res_abs + w * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (lo + hi);
        }
    }
    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[7]) * (fc - mean).abs();
    for j in 0..7 {
        res_asc = res_asc + T::lit(WGK[j]) * ((f1[j] - mean).abs() + (f2[j] - mean).abs());
    }
    let value = res_k * half_len;
    res_abs = res_abs * abs_half;
    res_asc = res_asc * abs_half;

    let mut error = ((res_k - res_g) * half_len).abs();
    if res_asc != T::zero() && error != T::zero() {
        let scale = (T::lit(200.0) * error / res_asc).powf(T::lit(1.5));
        error = res_asc * scale.min(T::one());
    }
    let floor = T::lit(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) {
        error = error.max(floor);
    }
    Panel {
        a,
        b,
        value,
        error,
        abs_value: res_abs,
        floor,
    }
}

/// Integrates `f` over the panels delimited by `breakpoints` (sorted, at least two).
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
/// Returns [`Error::NoConvergence`] when the panel budget runs out or when the
/// round-off floor alone already exceeds the target.
pub fn integrate_with_breakpoints<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    breakpoints: &[T],
    cfg: &QuadConfig<T>,
) -> Result<Quadrature<T>> {
    assert!(breakpoints.len() >= 2, "need at least one panel");
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breakpoints.windows(2) {
        heap.push(kronrod15(&mut f, w[0], w[1]));
        evaluations += 15;
    }
    loop {
        let (value, error, abs_value, floor) = heap.iter().fold(
            (T::zero(), T::zero(), T::zero(), T::zero()),
            |(v, e, a, fl), p| (v + p.value, e + p.error, a + p.abs_value, fl + p.floor),
        );
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if error <= target {
            return Ok(Quadrature {
                value,
                abs_error: error,
                abs_value,
                evaluations,
            });
        }
        let roundoff_bound = floor > target && heap.len() > breakpoints.len();
        if heap.len() >= cfg.max_panels || roundoff_bound {
            return Err(Error::NoConvergence {
                what: "adaptive quadrature",
                estimate: value.to_f64().unwrap_or(f64::NAN),
                error: error.to_f64().unwrap_or(f64::NAN),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = T::lit(0.5) * (worst.a + worst.b);
        heap.push(kronrod15(&mut f, worst.a, mid));
        heap.push(kronrod15(&mut f, mid, worst.b));
        evaluations += 30;
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<T: Real, F: FnMut(T) -> T>(f: F, a: T, b: T, cfg: &QuadConfig<T>) -> Result<Quadrature<T>> {
    integrate_with_breakpoints(f, &[a, b], cfg)
}

/// Integrates `f` over `[a, ∞)` through the map `x = a + t/(1 - t)`.
pub fn integrate_to_infinity<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    a: T,
    cfg: &QuadConfig<T>,
) -> Result<Quadrature<T>> {
    let one = T::one();
    let mapped = move |t: T| {
        let s = one - t;
        let x = a + t / s;
        let v = f(x) / (s * s);
        if v.is_finite() {
            v
        } else {
            T::zero()
        }
    };
    let cuts: Vec<T> = [0.0, 0.5, 0.75, 0.9, 0.99, 1.0].iter().map(|&c| T::lit(c)).collect();
    integrate_with_breakpoints(mapped, &cuts, cfg)
}
