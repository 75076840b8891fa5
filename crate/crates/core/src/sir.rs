//! Per-antenna SIR laws and the distributions of the SC/SSC/MRC combiner output.
//!
//! With Rayleigh fading on every link, the SIR on antenna `j` is
//! `p0 λ0 h0j / Σ pi λi hij` with unit-mean exponential gains. Its exact CDF is
//! a finite product over interferers; replacing the interferers by `κ` equal
//! ones of the same total power gives a Lomax upper bound that depends only on
//! `κ` and `δ p0`, which is what the allocator works with.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_with_breakpoints, QuadConfig};
use crate::scalar::Real;
use crate::special::{factorial_root, gamma_p, harmonic, ln_factorial, EULER_GAMMA};

/// Signal path loss and the mean received power of each interferer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitTopology<T> {
    signal_path_loss: T,
    interferer_rx_powers: Vec<T>,
}

impl<T: Real> ExplicitTopology<T> {
    /// `interferer_rx_powers[i]` is `p_i λ_i` in watts; at least one entry.
    pub fn new(signal_path_loss: T, interferer_rx_powers: Vec<T>) -> Result<Self> {
        let positive = |v: T| v.is_finite() && v > T::zero();
        if !positive(signal_path_loss) {
            return Err(Error::InvalidParameter(format!(
                "signal path loss must be finite and positive, got {signal_path_loss}"
            )));
        }
        if interferer_rx_powers.is_empty() {
            return Err(Error::InvalidParameter("at least one interferer is required".into()));
        }
        if let Some(bad) = interferer_rx_powers.iter().find(|&&p| !positive(p)) {
            return Err(Error::InvalidParameter(format!(
                "interferer powers must be finite and positive, got {bad}"
            )));
        }
        Ok(Self {
            signal_path_loss,
            interferer_rx_powers,
        })
    }

    pub fn signal_path_loss(&self) -> T {
        self.signal_path_loss
    }

    pub fn interferer_rx_powers(&self) -> &[T] {
        &self.interferer_rx_powers
    }

    pub fn kappa(&self) -> u32 {
        self.interferer_rx_powers.len() as u32
    }

    pub fn total_interference(&self) -> T {
        self.interferer_rx_powers
            .iter()
            .fold(T::zero(), |acc, &p| acc + p)
    }

    /// `δ = λ0 / Σ pi λi`.
    pub fn delta(&self) -> T {
        self.signal_path_loss / self.total_interference()
    }

    pub fn effective(&self) -> EffectiveChannel<T> {
        EffectiveChannel {
            kappa: self.kappa(),
            delta: self.delta(),
        }
    }
}

/// Number of interferers `κ` and the signal-to-interference path ratio `δ` (1/W).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveChannel<T> {
    kappa: u32,
    delta: T,
}

impl<T: Real> EffectiveChannel<T> {
    pub fn new(kappa: u32, delta: T) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::InvalidParameter("kappa must be at least 1".into()));
        }
        if !(delta.is_finite() && delta > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be finite and positive, got {delta}"
            )));
        }
        Ok(Self { kappa, delta })
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    fn kappa_t(&self) -> T {
        T::count(u64::from(self.kappa))
    }
}

/// Which per-antenna law feeds the SC/SSC outage.
#[derive(Debug, Clone, Copy)]
pub enum ChannelSource<'a, T> {
    /// Exact product form; needs the full topology.
    Exact(&'a ExplicitTopology<T>),
    /// Lomax upper bound; needs only `(κ, δ)`.
    Bound(&'a EffectiveChannel<T>),
}

/// How [`outage_mrc`] evaluates the sum law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MrcMethod {
    /// Gamma-type left-tail approximation.
    #[default]
    Approx,
    /// Numerical inversion integral; may fail to converge.
    Exact,
}

/// SIR threshold `2^r − 1` for a rate `r` in bits/s/Hz.
pub fn sir_threshold<T: Real>(r0: T) -> T {
    (r0 * T::LN_2()).exp_m1()
}

/// `1 − Π (1 + γ pi λi / (p0 λ0))^{-1}`.
pub fn per_antenna_cdf_exact<T: Real>(gamma: T, topo: &ExplicitTopology<T>, p0: T) -> T {
    if gamma.is_infinite() {
        return T::one();
    }
    let signal = p0 * topo.signal_path_loss;
    let log_survival = topo
        .interferer_rx_powers
        .iter()
        .fold(T::zero(), |acc, &p| acc + (gamma * p / signal).ln_1p());
    -(-log_survival).exp_m1()
}

/// `1 − (1 + γ/(κ δ p0))^{-κ}`.
pub fn per_antenna_cdf_bound<T: Real>(gamma: T, ch: &EffectiveChannel<T>, p0: T) -> T {
    if gamma.is_infinite() {
        return T::one();
    }
    let k = ch.kappa_t();
    -(-k * (gamma / (k * ch.delta * p0)).ln_1p()).exp_m1()
}

/// Lomax density matching [`per_antenna_cdf_bound`].
pub fn per_antenna_pdf_lomax<T: Real>(gamma: T, ch: &EffectiveChannel<T>, p0: T) -> T {
    if gamma < T::zero() || gamma.is_infinite() {
        return T::zero();
    }
    let k = ch.kappa_t();
    let scale = ch.delta * p0;
    (-(k + T::one()) * (gamma / (k * scale)).ln_1p()).exp() / scale
}

/// Outage of SC and SSC at rate `r0`: `F(2^r0 − 1)^M`.
pub fn outage_sc_ssc<T: Real>(r0: T, p0: T, antennas: u32, source: ChannelSource<'_, T>) -> T {
    let gamma = sir_threshold(r0);
    let single = match source {
        ChannelSource::Exact(topo) => per_antenna_cdf_exact(gamma, topo, p0),
        ChannelSource::Bound(ch) => per_antenna_cdf_bound(gamma, ch, p0),
    };
    single.powi(antennas as i32)
}

fn check_order(function: &'static str, antennas: u32, kappa: u32) -> Result<()> {
    if antennas == 0 || kappa == 0 {
        return Err(domain(function, format!("M = {antennas}, kappa = {kappa}")));
    }
    Ok(())
}

/// Real and imaginary parts of `e^{-u}(ξ(κ,u) + iπ u^κ/κ!)`.
fn scaled_xi<T: Real>(u: T, kappa: u32) -> (T, T) {
    let k = u64::from(kappa);
    let tiny = T::lit(1e-17);
    let mut term = (-u).exp();
    let mut t_kappa = T::zero();
    let mut tail = T::zero();
    let mut m: u64 = 0;
    loop {
        if m == k {
            t_kappa = term;
        } else {
            let c = term / (T::count(m) - T::count(k));
            tail = tail + c;
            if m > k && T::count(m) > u && c.abs() <= tiny * tail.abs() {
                break;
            }
        }
        if term == T::zero() && m > k {
            break;
        }
        m += 1;
        term = term * u / T::count(m);
        if m > 100_000 {
            break;
        }
    }
    let lead = harmonic::<T>(k) - T::lit(EULER_GAMMA) - u.ln();
    (t_kappa * lead - tail, T::PI() * t_kappa)
}

/// Exact CDF of the sum of `M` i.i.d. unit-scale Lomax(`κ`) variables,
/// by numerical inversion of its Laplace transform.
///
/// The integrand oscillates in sign and the result is a small difference of
/// large contributions in the left tail; when the quadrature cannot certify a
/// relative error of `1e-6` the call fails with [`Error::NoConvergence`]
/// rather than returning an inaccurate value.
pub fn mrc_sum_cdf_exact<T: Real>(x: T, antennas: u32, kappa: u32) -> Result<T> {
    check_order("mrc_sum_cdf_exact", antennas, kappa)?;
    if x < T::zero() || x.is_nan() {
        return Err(domain("mrc_sum_cdf_exact", format!("x = {x}")));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    if x.is_infinite() {
        return Ok(T::one());
    }
    let m = antennas as i32;
    let kf = T::count(u64::from(kappa));
    let mf = T::count(u64::from(antennas));

    // Tail: |z| ≤ 3, so the integrand beyond u is at most
    // κ^M M 3^{M-1} t_κ(u) / u.
    let log_prefactor = mf * kf.ln() + mf.ln() + (mf - T::one()) * T::lit(3.0).ln();
    let ln_kfact = ln_factorial::<T>(u64::from(kappa));
    let target = T::lit(1e-14).ln();
    let mut upper = kf.max(T::one());
    while log_prefactor - upper + kf * upper.ln() - ln_kfact - upper.ln() > target {
        upper = upper + T::one();
    }

    let scale = kf.powi(m) / T::PI();
    let integrand = |u: T| {
        if u <= T::zero() {
            return T::zero();
        }
        let (re, im) = scaled_xi(u, kappa);
        let radius = re.hypot(im);
        let im_pow = radius.powi(m) * (mf * im.atan2(re)).sin();
        -(-x * u).exp_m1() / u * scale * im_pow
    };
    let mut cuts = vec![T::zero()];
    for c in [0.25, 1.0, 4.0, 16.0, 64.0, 256.0] {
        let c = T::lit(c);
        if c < upper {
            cuts.push(c);
        }
    }
    cuts.push(upper);
    let cfg = QuadConfig::new(0.0, 1e-6).with_max_panels(4000);
    let q = integrate_with_breakpoints(integrand, &cuts, &cfg)?;
    Ok(q.value)
}

/// Gamma-type density of the Lomax sum, accurate in the left tail.
pub fn mrc_sum_pdf_approx<T: Real>(x: T, antennas: u32, kappa: u32) -> T {
    if x < T::zero() || antennas == 0 || kappa == 0 {
        return T::zero();
    }
    if x.is_infinite() {
        return T::zero();
    }
    let mf = T::count(u64::from(antennas));
    let kf = T::count(u64::from(kappa));
    let l = (x / mf).ln_1p();
    let mut log_density = mf * kf.ln() + (mf - T::one()) * mf.ln()
        - ln_factorial::<T>(u64::from(antennas) - 1)
        - (T::one() + mf * kf) * l;
    if antennas > 1 {
        if l == T::zero() {
            return T::zero();
        }
        log_density = log_density + (mf - T::one()) * l.ln();
    }
    log_density.exp()
}

/// Gamma-type CDF of the Lomax sum: `P(M, κM ln(1 + x/M))`.
pub fn mrc_sum_cdf_approx<T: Real>(x: T, antennas: u32, kappa: u32) -> T {
    if x <= T::zero() || antennas == 0 || kappa == 0 {
        return T::zero();
    }
    if x.is_infinite() {
        return T::one();
    }
    let mf = T::count(u64::from(antennas));
    let kf = T::count(u64::from(kappa));
    let y = kf * mf * (x / mf).ln_1p();
    if antennas == 1 {
        return -(-y).exp_m1();
    }
    gamma_p(mf, y).expect("P(M, y) is defined for M ≥ 1 and finite y ≥ 0")
}

/// Lower bound `(1 − exp(−κ M ln(1 + x/M) / (M!)^{1/M}))^M` on the sum CDF.
pub fn mrc_sum_cdf_lower_bound<T: Real>(x: T, antennas: u32, kappa: u32) -> T {
    if x <= T::zero() || antennas == 0 || kappa == 0 {
        return T::zero();
    }
    if x.is_infinite() {
        return T::one();
    }
    let mf = T::count(u64::from(antennas));
    let kf = T::count(u64::from(kappa));
    let g: T = factorial_root(u64::from(antennas)).expect("M ≥ 1");
    let y = kf * mf * (x / mf).ln_1p() / g;
    (-(-y).exp_m1()).powi(antennas as i32)
}

/// Approximate `ε`-quantile of the Lomax sum: `(M!)^{1/M}/κ · |ln(1 − ε^{1/M})|`.
pub fn mrc_inv_cdf_approx<T: Real>(epsilon: T, antennas: u32, kappa: u32) -> T {
    let mf = T::count(u64::from(antennas));
    let kf = T::count(u64::from(kappa));
    let g: T = factorial_root(u64::from(antennas)).expect("M ≥ 1");
    let root = epsilon.powf(mf.recip());
    g / kf * (-root).ln_1p().abs()
}

/// MRC outage at rate `r0`: the sum law evaluated at `(2^r0 − 1)/(κ δ p0)`.
pub fn outage_mrc<T: Real>(
    r0: T,
    p0: T,
    ch: &EffectiveChannel<T>,
    antennas: u32,
    method: MrcMethod,
) -> Result<T> {
    let x = sir_threshold(r0) / (ch.kappa_t() * ch.delta * p0);
    match method {
        MrcMethod::Approx => Ok(mrc_sum_cdf_approx(x, antennas, ch.kappa)),
        MrcMethod::Exact => mrc_sum_cdf_exact(x, antennas, ch.kappa),
    }
}

/// Density of a product of `M` i.i.d. Pareto-I(`κ`, 1) variables.
pub fn pareto_product_pdf<T: Real>(x: T, antennas: u32, kappa: u32) -> T {
    if x < T::one() || x.is_infinite() || antennas == 0 || kappa == 0 {
        return T::zero();
    }
    let mf = T::count(u64::from(antennas));
    let kf = T::count(u64::from(kappa));
    let lx = x.ln();
    let mut log_density =
        mf * kf.ln() - ln_factorial::<T>(u64::from(antennas) - 1) - (kf + T::one()) * lx;
    if antennas > 1 {
        if lx == T::zero() {
            return T::zero();
        }
        log_density = log_density + (mf - T::one()) * lx.ln();
    }
    log_density.exp()
}
