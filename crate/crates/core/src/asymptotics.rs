//! Ultra-reliable (`ε → 0`) gaps between the combining schemes.
//!
//! As `ε → 0` the optimum sits where `ω η Pc → 0`, so `ρ ≈ sqrt(2 η Pc / ω)`
//! and `ϱ ≈ sqrt(2 ω η Pc) / ln 2`. Every gap below is a ratio of those
//! square roots.

use crate::allocator::PowerModel;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::factorial_root;

/// Fitted coefficients of `(M!)^{1/M} ≈ a M + b` over `1 ≤ M ≤ 64`.
pub const G_FIT_SLOPE: f64 = 0.374;
pub const G_FIT_INTERCEPT: f64 = 0.786;

fn g<T: Real>(antennas: u32) -> Result<T> {
    factorial_root(u64::from(antennas))
}

/// `ω_MRC / ω_SC → (M!)^{1/M}`.
pub fn gap_omega_mrc_sc<T: Real>(antennas: u32) -> Result<T> {
    g(antennas)
}

/// `r*_MRC / r*_SC → (M!)^{1/(2M)}`.
pub fn gap_rate_mrc_sc<T: Real>(antennas: u32) -> Result<T> {
    Ok(g::<T>(antennas)?.sqrt())
}

/// `p*_MRC / p*_SC → (M!)^{-1/(2M)}`.
pub fn gap_power_mrc_sc<T: Real>(antennas: u32) -> Result<T> {
    Ok(g::<T>(antennas)?.sqrt().recip())
}

fn chain_ratio<T: Real>(antennas: u32, pm: &PowerModel<T>) -> Result<T> {
    let single = pm.p_t + pm.p_r + pm.p_syn;
    let all = pm.p_t + T::count(u64::from(antennas)) * pm.p_r + pm.p_syn;
    if single == T::zero() && all == T::zero() {
        return Err(Error::Degenerate("zero circuit power for both SSC and SC"));
    }
    Ok(single / all)
}

/// `r*_SSC / r*_SC` and `p*_SSC / p*_SC`, both `sqrt((p_t+p_r+p_syn)/(p_t+M p_r+p_syn))`.
pub fn gap_ssc_sc<T: Real>(antennas: u32, pm: &PowerModel<T>) -> Result<T> {
    if antennas == 0 {
        return Err(crate::error::domain("gap_ssc_sc", "M = 0"));
    }
    Ok(chain_ratio(antennas, pm)?.sqrt())
}

/// `(r*_MRC / r*_SSC, p*_MRC / p*_SSC)`.
pub fn gap_mrc_ssc<T: Real>(antennas: u32, pm: &PowerModel<T>) -> Result<(T, T)> {
    let ssc = gap_ssc_sc(antennas, pm)?;
    Ok((gap_rate_mrc_sc::<T>(antennas)? / ssc, gap_power_mrc_sc::<T>(antennas)? / ssc))
}

/// Linear surrogate `0.374 M + 0.786` for `(M!)^{1/M}`.
pub fn g_linear_fit<T: Real>(antennas: u32) -> T {
    T::lit(G_FIT_SLOPE) * T::count(u64::from(antennas)) + T::lit(G_FIT_INTERCEPT)
}

/// Antenna count at which SSC and MRC optimal transmit powers cross,
/// under the linear surrogate for `(M!)^{1/M}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossover<T> {
    pub value: T,
    /// `0.626 p_r − 0.374 (p_t + p_syn)`; its sign orients the comparison.
    pub denominator: T,
}

impl<T: Real> Crossover<T> {
    /// Whether SSC transmits with less power than MRC at `antennas`.
    pub fn ssc_uses_less_power(&self, antennas: u32) -> bool {
        let m = T::count(u64::from(antennas));
        if self.denominator > T::zero() {
            m > self.value
        } else {
            m < self.value
        }
    }
}

/// `(0.786 p_r − 0.214 S) / (0.626 p_r − 0.374 S)` with `S = p_t + p_syn`.
pub fn ssc_power_crossover<T: Real>(pm: &PowerModel<T>) -> Result<Crossover<T>> {
    let s = pm.p_t + pm.p_syn;
    let one = T::one();
    let a = T::lit(G_FIT_SLOPE);
    let b = T::lit(G_FIT_INTERCEPT);
    let numerator = b * pm.p_r - (one - b) * s;
    let denominator = (one - a) * pm.p_r - a * s;
    let scale = pm.p_r.abs() + s.abs();
    if denominator.abs() <= T::epsilon() * T::lit(4.0) * scale {
        return Err(Error::Singular("ssc_power_crossover"));
    }
    Ok(Crossover {
        value: numerator / denominator,
        denominator,
    })
}

/// Convenience form of [`ssc_power_crossover`].
pub fn ssc_uses_less_power<T: Real>(antennas: u32, pm: &PowerModel<T>) -> Result<bool> {
    Ok(ssc_power_crossover(pm)?.ssc_uses_less_power(antennas))
}
