//! Scalar special functions used by the closed forms: the main branch of the
//! Lambert W function, the incomplete gamma functions, and factorial helpers.
//!
//! All kernels are pure and generic over [`Real`].

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

const MAX_HALLEY_ITERATIONS: usize = 64;
const MAX_GAMMA_ITERATIONS: usize = 100_000;

/// Inputs this far below `-1/e` are still treated as the branch point.
const BRANCH_POINT_SLACK: f64 = 1e-12;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Main branch `W₀` of the Lambert W function: the solution `w ≥ -1` of
/// `w·eʷ = x` for `x ≥ -1/e`.
///
/// Uses Halley iteration from a piecewise initial guess (branch-point series
/// near `-1/e`, a log-based guess for moderate arguments, and the asymptotic
/// expansion for large ones).
pub fn lambert_w0<T: Real>(x: T) -> Result<T> {
    let one = T::one();
    let inv_e = one / T::E();
    if x.is_nan() {
        return Err(domain("lambert_w0", "NaN argument"));
    }
    if x < -inv_e - T::lit(BRANCH_POINT_SLACK) {
        return Err(domain("lambert_w0", format!("{x} < -1/e")));
    }
    if x <= -inv_e {
        return Ok(-one);
    }
    if x == T::zero() {
        return Ok(x);
    }
    if x.is_infinite() {
        return Ok(x);
    }

    let mut w = initial_guess(x);
    for _ in 0..MAX_HALLEY_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + one;
        if wp1 == T::zero() {
            break;
        }
        let two = T::lit(2.0);
        let denom = ew * wp1 - (w + two) * f / (two * wp1);
        if denom == T::zero() || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        w = w - step;
        if step.abs() <= T::lit(4.0) * T::epsilon() * (one + w.abs()) {
            break;
        }
    }
    Ok(w.max(-one))
}

/// `1 + W0((q − 1)/e)` for `q ≥ 0`, accurate when `q` is tiny.
///
/// Forming `(q − 1)/e` first rounds away everything below `q ~ 1e-16`, so
/// small `q` instead solves `1 − (1 − w)eʷ = q` for `w` directly.
pub fn lambert_w0_shifted<T: Real>(q: T) -> Result<T> {
    let one = T::one();
    if !(q >= T::zero()) {
        return Err(domain("lambert_w0_shifted", format!("{q} < 0")));
    }
    if q >= T::lit(0.5) {
        return Ok(one + lambert_w0((q - one) / T::E())?);
    }
    if q == T::zero() {
        return Ok(q);
    }
    let p = (T::lit(2.0) * q).sqrt();
    let mut w = p - p * p / T::lit(3.0) + T::lit(11.0 / 72.0) * p * p * p;
    for _ in 0..MAX_HALLEY_ITERATIONS {
        // Σ_{n≥2} (n − 1) wⁿ / n!, no cancellation for w in (0, 1)
        let mut term = w;
        let mut h = T::zero();
        for n in 2..40u32 {
            term = term * w / T::count(u64::from(n));
            let add = T::count(u64::from(n - 1)) * term;
            h = h + add;
            if add <= T::epsilon() * h {
                break;
            }
        }
        let step = (h - q) / (w * w.exp());
        w = w - step;
        if step.abs() <= T::lit(4.0) * T::epsilon() * w {
            break;
        }
    }
    Ok(w)
}

fn initial_guess<T: Real>(x: T) -> T {
    let one = T::one();
    if x < T::lit(-0.32) {
        // Series about the branch point in p = sqrt(2(e·x + 1)).
        let p = (T::lit(2.0) * (T::E() * x + one)).max(T::zero()).sqrt();
        return -one + p - p * p / T::lit(3.0) + T::lit(11.0 / 72.0) * p * p * p;
    }
    if x < T::lit(3.0) {
        // Winitzki-style approximation, good to a few percent on (-0.32, 3).
        let l = x.ln_1p();
        return l * (one - (one + l).ln() / (T::lit(2.0) + l));
    }
    let l1 = x.ln();
    let l2 = l1.ln();
    l1 - l2 + l2 / l1
}

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7, n = 9).
#[allow(clippy::excessive_precision)]
pub fn ln_gamma<T: Real>(x: T) -> T {
    const G: f64 = 7.0;
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let one = T::one();
    let half = T::lit(0.5);
    if x < half {
        // Reflection keeps the series in its accurate range.
        let pi = T::PI();
        return (pi / (pi * x).sin()).ln() - ln_gamma(one - x);
    }
    let z = x - one;
    let mut acc = T::lit(COEFFS[0]);
    for (k, &c) in COEFFS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (z + T::count(k as u64));
    }
    let t = z + T::lit(G) + half;
    half * (T::lit(2.0) * T::PI()).ln() + (z + half) * t.ln() - t + acc.ln()
}

/// `ln(n!)`. Exact summation of logarithms for small `n`, log-gamma beyond.
pub fn ln_factorial<T: Real>(n: u64) -> T {
    if n <= 256 {
        (2..=n).fold(T::zero(), |acc, k| acc + T::count(k).ln())
    } else {
        ln_gamma(T::count(n) + T::one())
    }
}

/// `(M!)^{1/M}`, computed through `ln(M!)` so it stays finite for very large `M`.
pub fn factorial_root<T: Real>(m: u64) -> Result<T> {
    if m < 1 {
        return Err(domain("factorial_root", "M must be at least 1"));
    }
    Ok((ln_factorial::<T>(m) / T::count(m)).exp())
}

/// Harmonic number `H_n = Σ_{m=1}^{n} 1/m`.
pub fn harmonic<T: Real>(n: u64) -> T {
    (1..=n).fold(T::zero(), |acc, m| acc + T::one() / T::count(m))
}

/// Regularised lower incomplete gamma `P(p, x) = γ(p, x)/Γ(p)`.
///
/// Evaluated directly (no `1 - Q` subtraction) whenever `x ≤ p + 1`, so tiny
/// left-tail probabilities keep full relative precision.
pub fn gamma_p<T: Real>(p: T, x: T) -> Result<T> {
    gamma_pair(p, x).map(|(lower, _)| lower)
}

/// Regularised upper incomplete gamma `Q(p, x) = Γ(p, x)/Γ(p)`.
pub fn gamma_q<T: Real>(p: T, x: T) -> Result<T> {
    gamma_pair(p, x).map(|(_, upper)| upper)
}

/// Upper incomplete gamma `Γ(p, x) = ∫ₓ^∞ t^{p-1} e^{-t} dt`.
///
/// Integer orders up to 100 in the continued-fraction region use the finite
/// exponential sum; everything else uses the series / continued-fraction split.
pub fn upper_incomplete_gamma<T: Real>(p: T, x: T) -> Result<T> {
    check_gamma_args(p, x)?;
    if x.is_infinite() {
        return Ok(T::zero());
    }
    let ln_complete = match small_integer(p) {
        Some(n) if x > p + T::one() => return Ok(upper_gamma_integer_sum(n, x)),
        Some(n) => ln_factorial::<T>(n - 1),
        None => ln_gamma(p),
    };
    if x == T::zero() {
        return Ok(ln_complete.exp());
    }
    let q = gamma_q(p, x)?;
    Ok(q * ln_complete.exp())
}

/// `Γ(n, x) = (n-1)! e^{-x} Σ_{k<n} x^k/k!` for positive integer `n`.
pub(crate) fn upper_gamma_integer_sum<T: Real>(n: u64, x: T) -> T {
    // Accumulate x^k/k! relative to the largest term to stay finite for large x.
    let lnx = x.ln();
    let log_terms: Vec<T> = (0..n)
        .map(|k| T::count(k) * lnx - ln_factorial::<T>(k))
        .collect();
    let peak = log_terms
        .iter()
        .copied()
        .fold(T::neg_infinity(), T::max);
    let sum = log_terms
        .iter()
        .fold(T::zero(), |acc, &l| acc + (l - peak).exp());
    (ln_factorial::<T>(n - 1) - x + peak + sum.ln()).exp()
}

fn small_integer<T: Real>(p: T) -> Option<u64> {
    if p.fract() == T::zero() && p >= T::one() && p <= T::lit(100.0) {
        p.to_u64()
    } else {
        None
    }
}

fn check_gamma_args<T: Real>(p: T, x: T) -> Result<()> {
    if !(p > T::zero()) || !p.is_finite() {
        return Err(domain("incomplete gamma", format!("order p = {p} must be positive")));
    }
    if !(x >= T::zero()) {
        return Err(domain("incomplete gamma", format!("x = {x} must be nonnegative")));
    }
    Ok(())
}

/// `(P(p, x), Q(p, x))`, series below `x = p + 1`, Lentz continued fraction above.
fn gamma_pair<T: Real>(p: T, x: T) -> Result<(T, T)> {
    check_gamma_args(p, x)?;
    let (zero, one) = (T::zero(), T::one());
    if x == zero {
        return Ok((zero, one));
    }
    if x.is_infinite() {
        return Ok((one, zero));
    }
    let log_prefactor = -x + p * x.ln() - ln_gamma(p);
    if x <= p + one {
        let lower = lower_series(p, x, log_prefactor)?;
        Ok((lower, one - lower))
    } else {
        let upper = upper_continued_fraction(p, x, log_prefactor)?;
        Ok((one - upper, upper))
    }
}

fn lower_series<T: Real>(p: T, x: T, log_prefactor: T) -> Result<T> {
    let mut denom = p;
    let mut term = T::one() / p;
    let mut sum = term;
    for _ in 0..MAX_GAMMA_ITERATIONS {
        denom = denom + T::one();
        term = term * x / denom;
        sum = sum + term;
        if term.abs() < sum.abs() * T::epsilon() {
            return Ok((log_prefactor + sum.ln()).exp());
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma series",
        estimate: sum.to_f64().unwrap_or(f64::NAN),
        error: term.to_f64().unwrap_or(f64::NAN),
    })
}

fn upper_continued_fraction<T: Real>(p: T, x: T, log_prefactor: T) -> Result<T> {
    let one = T::one();
    let tiny = T::min_positive_value() / T::epsilon();
    let mut b = x + one - p;
    let mut c = one / tiny;
    let mut d = one / b;
    let mut h = d;
    for i in 1..MAX_GAMMA_ITERATIONS {
        let n = T::count(i as u64);
        let an = -n * (n - p);
        b = b + T::lit(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let delta = d * c;
        h = h * delta;
        if (delta - one).abs() < T::epsilon() {
            return Ok((log_prefactor + h.ln()).exp());
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma continued fraction",
        estimate: h.to_f64().unwrap_or(f64::NAN),
        error: f64::NAN,
    })
}
