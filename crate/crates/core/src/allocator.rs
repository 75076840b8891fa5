//! Energy-efficient power and rate allocation under an outage target.
//!
//! At outage exactly `ε`, every scheme's reliability curve is
//! `r0 = log2(1 + ω p0)` for a scheme-dependent slope `ω`. Along that curve
//! the efficiency `r0 / (p0/η + Pc)` is log-concave in `ln p0`, and its
//! maximiser has a closed form in the main branch of Lambert W. Box
//! constraints on power and rate then clamp the optimum to the nearest
//! feasible end of the curve.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sir::{outage_sc_ssc, sir_threshold, ChannelSource, EffectiveChannel};
use crate::special::{factorial_root, lambert_w0_shifted};

/// Diversity combiner at the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Selection combining: every branch powered, best SIR selected.
    Sc,
    /// Switch-and-stay combining: a single active RF chain.
    Ssc,
    /// Maximal ratio combining.
    Mrc,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Sc, Scheme::Ssc, Scheme::Mrc];

    /// Exponent of `M` in the receive-chain power: 0 for SSC, 1 otherwise.
    pub fn beta(self) -> u32 {
        match self {
            Scheme::Ssc => 0,
            Scheme::Sc | Scheme::Mrc => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Sc => "SC",
            Scheme::Ssc => "SSC",
            Scheme::Mrc => "MRC",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(Scheme::Sc),
            "ssc" => Ok(Scheme::Ssc),
            "mrc" => Ok(Scheme::Mrc),
            other => Err(Error::InvalidParameter(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Amplifier drain efficiency and circuit power terms, in watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel<T> {
    pub eta: T,
    pub p_t: T,
    pub p_r: T,
    pub p_syn: T,
}

impl<T: Real> PowerModel<T> {
    pub fn new(eta: T, p_t: T, p_r: T, p_syn: T) -> Result<Self> {
        let pm = Self { eta, p_t, p_r, p_syn };
        pm.validate()?;
        Ok(pm)
    }

    /// η = 0.35, p_t = 50 mW, p_r = 60 mW, p_syn = 10 mW.
    pub fn reference() -> Self {
        Self {
            eta: T::lit(0.35),
            p_t: T::lit(0.05),
            p_r: T::lit(0.06),
            p_syn: T::lit(0.01),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > T::zero() && self.eta <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "eta must lie in (0, 1], got {}",
                self.eta
            )));
        }
        for (name, v) in [("p_t", self.p_t), ("p_r", self.p_r), ("p_syn", self.p_syn)] {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `p_t + M^β p_r + p_syn`.
    pub fn circuit_power(&self, antennas: u32, scheme: Scheme) -> T {
        let chains = if scheme.beta() == 0 { 1 } else { antennas };
        self.p_t + T::count(u64::from(chains)) * self.p_r + self.p_syn
    }
}

/// Outage target and box constraints on rate and power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraints<T> {
    pub epsilon: T,
    pub r_min: T,
    pub p_min: T,
    pub p_max: T,
}

impl<T: Real> Constraints<T> {
    pub fn new(epsilon: T, r_min: T, p_min: T, p_max: T) -> Result<Self> {
        let c = Self {
            epsilon,
            r_min,
            p_min,
            p_max,
        };
        c.validate()?;
        Ok(c)
    }

    /// r_min = 0.01 bits/s/Hz, p_min = 10 mW, p_max = 10 W.
    pub fn reference(epsilon: T) -> Self {
        Self {
            epsilon,
            r_min: T::lit(0.01),
            p_min: T::lit(0.01),
            p_max: T::lit(10.0),
        }
    }

    /// No rate floor and an unbounded power range.
    pub fn unconstrained(epsilon: T) -> Self {
        Self {
            epsilon,
            r_min: T::zero(),
            p_min: T::zero(),
            p_max: T::infinity(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero() && self.epsilon < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.r_min.is_finite() && self.r_min >= T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "r_min must be finite and non-negative, got {}",
                self.r_min
            )));
        }
        if !(self.p_min.is_finite() && self.p_min >= T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "p_min must be finite and non-negative, got {}",
                self.p_min
            )));
        }
        if self.p_max.is_nan() || self.p_max < self.p_min || self.p_max <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "p_max must be positive and at least p_min, got {}",
                self.p_max
            )));
        }
        Ok(())
    }
}

/// Where the optimum sits relative to the constraint box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Interior,
    ClampedLow,
    ClampedHigh,
    Infeasible,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Interior => "interior",
            Regime::ClampedLow => "clamped_low",
            Regime::ClampedHigh => "clamped_high",
            Regime::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Optimal transmit power, rate and efficiency. Infeasible results carry NaN
/// in the three optimum fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult<T> {
    pub scheme: Scheme,
    pub p0_star: T,
    pub r0_star: T,
    pub ee_star: T,
    pub omega: T,
    pub regime: Regime,
}

impl<T: Real> AllocationResult<T> {
    pub fn is_feasible(&self) -> bool {
        self.regime != Regime::Infeasible
    }
}

/// Slope of the reliability curve `r0 = log2(1 + ω p0)` at outage `ε`.
pub fn omega<T: Real>(scheme: Scheme, antennas: u32, ch: &EffectiveChannel<T>, epsilon: T) -> T {
    let mf = T::count(u64::from(antennas));
    let kf = T::count(u64::from(ch.kappa()));
    // ln(1 − ε^{1/M}) < 0
    let log_miss = (-epsilon.powf(mf.recip())).ln_1p();
    match scheme {
        Scheme::Sc | Scheme::Ssc => kf * ch.delta() * (-log_miss / kf).exp_m1(),
        Scheme::Mrc => {
            let g: T = factorial_root(u64::from(antennas)).expect("M ≥ 1");
            ch.delta() * g * log_miss.abs()
        }
    }
}

/// `log2(1 + ω p0)`.
pub fn rate_on_curve<T: Real>(p0: T, omega: T) -> T {
    (omega * p0).ln_1p() / T::LN_2()
}

/// Goodput per consumed watt: `r0 (1 − outage) / (p0/η + Pc)`.
pub fn energy_efficiency<T: Real>(
    r0: T,
    p0: T,
    scheme: Scheme,
    pm: &PowerModel<T>,
    antennas: u32,
    outage: T,
) -> Result<T> {
    let consumed = p0 / pm.eta + pm.circuit_power(antennas, scheme);
    if consumed == T::zero() {
        return Err(Error::DivisionByZero("energy_efficiency"));
    }
    Ok(r0 * (T::one() - outage) / consumed)
}

fn rate_reaches<T: Real>(r_min: T, rate_at_max: T) -> bool {
    r_min <= rate_at_max * (T::one() + T::lit(1e-12)) || r_min <= T::zero()
}

/// Whether `r_min` is reachable at `p_max` on `scheme`'s own reliability curve.
pub fn feasibility_check<T: Real>(
    scheme: Scheme,
    ch: &EffectiveChannel<T>,
    antennas: u32,
    constraints: &Constraints<T>,
) -> bool {
    let w = omega(scheme, antennas, ch, constraints.epsilon);
    rate_reaches(constraints.r_min, rate_on_curve(constraints.p_max, w))
}

/// Scheme-independent check with the SC slope, the smallest of the three.
pub fn feasible_for_all_schemes<T: Real>(
    ch: &EffectiveChannel<T>,
    antennas: u32,
    constraints: &Constraints<T>,
) -> bool {
    feasibility_check(Scheme::Sc, ch, antennas, constraints)
}

/// Maximiser `(ρ, ϱ)` of the efficiency along the reliability curve,
/// ignoring every box constraint.
///
/// With `c = ω η Pc` and `W = W0((c − 1)/e)` it is `ρ = (e^{1+W} − 1)/ω`,
/// `ϱ = (1 + W)/ln 2`, so `ϱ = log2(1 + ω ρ)` holds by construction.
pub fn unconstrained_optimum<T: Real>(omega: T, eta: T, circuit_power: T) -> Result<(T, T)> {
    if !(omega > T::zero() && eta > T::zero() && circuit_power >= T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "need omega > 0, eta > 0, circuit power ≥ 0; got {omega}, {eta}, {circuit_power}"
        )));
    }
    let c = omega * eta * circuit_power;
    if c == T::zero() {
        return Err(Error::Degenerate("zero circuit power drives the optimum to p0 = 0"));
    }
    let shifted = lambert_w0_shifted(c)?;
    let rho = shifted.exp_m1() / omega;
    let varrho = shifted / T::LN_2();
    Ok((rho, varrho))
}

/// Numerator of the efficiency's derivative along the curve, relative to
/// `ω (p0 + η Pc)`; zero at the interior optimum.
pub fn stationarity_residual<T: Real>(p0: T, omega: T, eta: T, circuit_power: T) -> T {
    let lead = omega * (p0 + eta * circuit_power);
    let wp = omega * p0;
    (lead - (T::one() + wp) * wp.ln_1p()) / lead
}

/// `ln EE` along the curve as a function of `x = ln p0`, ignoring the `1 − ε` factor.
pub fn log_ee_on_curve<T: Real>(x: T, omega: T, eta: T, circuit_power: T) -> T {
    let p0 = x.exp();
    rate_on_curve(p0, omega).ln() - (p0 / eta + circuit_power).ln()
}

/// Outage model whose `ε`-level set is exactly the reliability curve.
///
/// SC/SSC use the Lomax bound raised to `M`; MRC uses the gamma lower-bound
/// form linearised in `ln(1 + x/M) ≈ x/M`, which is the expression the MRC
/// slope inverts.
pub fn model_outage<T: Real>(
    scheme: Scheme,
    r0: T,
    p0: T,
    ch: &EffectiveChannel<T>,
    antennas: u32,
) -> T {
    match scheme {
        Scheme::Sc | Scheme::Ssc => outage_sc_ssc(r0, p0, antennas, ChannelSource::Bound(ch)),
        Scheme::Mrc => {
            let g: T = factorial_root(u64::from(antennas)).expect("M ≥ 1");
            let y = sir_threshold(r0) / (ch.delta() * p0 * g);
            (-(-y).exp_m1()).powi(antennas as i32)
        }
    }
}

fn infeasible<T: Real>(scheme: Scheme, omega: T) -> AllocationResult<T> {
    AllocationResult {
        scheme,
        p0_star: T::nan(),
        r0_star: T::nan(),
        ee_star: T::nan(),
        omega,
        regime: Regime::Infeasible,
    }
}

/// Energy-efficient `(p0, r0)` for `scheme`, clamped to the constraint box.
pub fn allocate<T: Real>(
    scheme: Scheme,
    ch: &EffectiveChannel<T>,
    antennas: u32,
    pm: &PowerModel<T>,
    constraints: &Constraints<T>,
) -> AllocationResult<T> {
    if constraints.epsilon > T::lit(0.1) {
        log::warn!(
            "epsilon = {} is not small; the reliability curve is a small-outage approximation",
            constraints.epsilon
        );
    }
    let w = omega(scheme, antennas, ch, constraints.epsilon);
    if !feasibility_check(scheme, ch, antennas, constraints) {
        return infeasible(scheme, w);
    }
    let pc = pm.circuit_power(antennas, scheme);
    let (rho, varrho) = unconstrained_optimum(w, pm.eta, pc).unwrap_or((T::zero(), T::zero()));
    let lower = constraints.p_min.max(sir_threshold(constraints.r_min) / w);

    let (p0, r0, regime) = if rho < lower {
        let p0 = lower.min(constraints.p_max);
        let r0 = rate_on_curve(constraints.p_min, w).max(constraints.r_min);
        (p0, r0, Regime::ClampedLow)
    } else if rho <= constraints.p_max {
        (rho, varrho, Regime::Interior)
    } else {
        let p0 = constraints.p_max;
        (p0, rate_on_curve(p0, w), Regime::ClampedHigh)
    };
    match energy_efficiency(r0, p0, scheme, pm, antennas, constraints.epsilon) {
        Ok(ee) => AllocationResult {
            scheme,
            p0_star: p0,
            r0_star: r0,
            ee_star: ee,
            omega: w,
            regime,
        },
        Err(_) => infeasible(scheme, w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn ch() -> EffectiveChannel<f64> {
        EffectiveChannel::new(8, 10.0).unwrap()
    }

    #[test]
    fn omega_examples() {
        let sc = omega(Scheme::Sc, 8, &ch(), 1e-5);
        let mrc = omega(Scheme::Mrc, 8, &ch(), 1e-5);
        assert!(rel(sc, 2.753_09) < 1e-5, "{sc}");
        assert!(rel(mrc, 10.189_2) < 1e-5, "{mrc}");
        assert_eq!(omega(Scheme::Ssc, 8, &ch(), 1e-5), sc);
        let sc1 = omega(Scheme::Sc, 1, &ch(), 1e-3);
        let mrc1 = omega(Scheme::Mrc, 1, &ch(), 1e-3);
        assert!(rel(sc1, 0.010_005_629_0) < 1e-8, "{sc1}");
        assert!(rel(mrc1, 0.010_005_003_3) < 1e-8, "{mrc1}");
    }

    #[test]
    fn rate_curve() {
        assert_eq!(rate_on_curve(0.0f64, 3.0), 0.0);
        assert!((rate_on_curve(0.5f64, 2.0) - 1.0).abs() < 1e-15);
        assert!(rel(rate_on_curve(0.429_264, 2.753_09), 1.125_52) < 1e-5);
    }

    #[test]
    fn efficiency_examples() {
        let pm = PowerModel::reference();
        assert_eq!(energy_efficiency(0.0, 0.4, Scheme::Sc, &pm, 8, 1e-5).unwrap(), 0.0);
        assert_eq!(energy_efficiency(1.0, 0.4, Scheme::Sc, &pm, 8, 1.0).unwrap(), 0.0);
        let ee = energy_efficiency(1.1255, 0.4291, Scheme::Sc, &pm, 8, 1e-5).unwrap();
        assert!(rel(ee, 0.6373) < 2e-4, "{ee}");
        let free = PowerModel::new(0.5, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            energy_efficiency(1.0, 0.0, Scheme::Sc, &free, 2, 0.0),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn circuit_power_beta() {
        let pm = PowerModel::<f64>::reference();
        assert!((pm.circuit_power(8, Scheme::Sc) - 0.54).abs() < 1e-15);
        assert!((pm.circuit_power(8, Scheme::Mrc) - 0.54).abs() < 1e-15);
        assert!((pm.circuit_power(8, Scheme::Ssc) - 0.12).abs() < 1e-15);
    }

    #[test]
    fn feasibility_examples() {
        let c = Constraints::new(1e-9, 5.0, 0.01, 10.0).unwrap();
        assert!(!feasibility_check(Scheme::Sc, &ch(), 1, &c));
        assert!(!feasible_for_all_schemes(&ch(), 1, &c));
        let c0 = Constraints::new(1e-9, 0.0, 0.01, 10.0).unwrap();
        assert!(Scheme::ALL.iter().all(|&s| feasibility_check(s, &ch(), 1, &c0)));
        // r_min sitting exactly on the curve at p_max
        let w = omega(Scheme::Sc, 4, &ch(), 1e-3);
        let edge = Constraints::new(1e-3, rate_on_curve(2.0, w), 0.01, 2.0).unwrap();
        assert!(feasibility_check(Scheme::Sc, &ch(), 4, &edge));
    }

    #[test]
    fn optimum_examples() {
        let (rho, varrho) = unconstrained_optimum(2.7532, 0.35, 0.54).unwrap();
        assert!(rel(rho, 0.429_26) < 1e-4, "{rho}");
        assert!(rel(varrho, 1.125_54) < 1e-4, "{varrho}");
        let (rho, varrho) = unconstrained_optimum(1.0, 0.5, 2.0).unwrap();
        assert!(rel(rho, std::f64::consts::E - 1.0) < 1e-14);
        assert!(rel(varrho, std::f64::consts::LOG2_E) < 1e-14);
        let (rho, varrho) = unconstrained_optimum(1.0, 0.5, 2.0 * (1.0 + 1e-10)).unwrap();
        assert!(rel(rho, std::f64::consts::E - 1.0) < 1e-9);
        assert!(rel(varrho, rate_on_curve(rho, 1.0)) < 1e-12);
        let (rho, _) = unconstrained_optimum(1.0, 0.35, 1e-12).unwrap();
        assert!(rho < 1e-5);
        assert!(matches!(unconstrained_optimum(1.0, 0.35, 0.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn allocate_regimes() {
        let pm = PowerModel::reference();
        let base = Constraints::reference(1e-5);
        let a = allocate(Scheme::Sc, &ch(), 8, &pm, &base);
        assert_eq!(a.regime, Regime::Interior);
        assert!(rel(a.p0_star, 0.429_264) < 1e-5);
        assert!(rel(a.r0_star, 1.125_520) < 1e-5);
        assert!(rel(a.ee_star, 0.637_151) < 1e-5);

        let high = Constraints { p_max: 0.1, ..base };
        let a = allocate(Scheme::Sc, &ch(), 8, &pm, &high);
        assert_eq!(a.regime, Regime::ClampedHigh);
        assert_eq!(a.p0_star, 0.1);
        assert!(rel(a.r0_star, 0.350_846) < 1e-5);

        let low = Constraints { r_min: 3.0, ..base };
        let a = allocate(Scheme::Sc, &ch(), 8, &pm, &low);
        assert_eq!(a.regime, Regime::ClampedLow);
        assert!(rel(a.p0_star, 2.542_602) < 1e-5);
        assert_eq!(a.r0_star, 3.0);
        assert!(rel(a.ee_star, 0.384_386) < 1e-5);

        let dead = Constraints::new(1e-9, 5.0, 0.01, 10.0).unwrap();
        let a = allocate(Scheme::Sc, &ch(), 1, &pm, &dead);
        assert_eq!(a.regime, Regime::Infeasible);
        assert!(a.p0_star.is_nan() && !a.is_feasible());
    }

    #[test]
    fn model_outage_hits_target() {
        for scheme in Scheme::ALL {
            for m in [1, 2, 4, 8, 16] {
                let w = omega(scheme, m, &ch(), 1e-4);
                let p0 = 0.37;
                let out = model_outage(scheme, rate_on_curve(p0, w), p0, &ch(), m);
                assert!(rel(out, 1e-4) < 1e-9, "{scheme} M={m}: {out}");
            }
        }
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("SSC".parse::<Scheme>().unwrap(), Scheme::Ssc);
        assert_eq!("mrc".parse::<Scheme>().unwrap(), Scheme::Mrc);
        assert!("egc".parse::<Scheme>().is_err());
        assert!(Scheme::Sc < Scheme::Ssc && Scheme::Ssc < Scheme::Mrc);
    }

    #[test]
    fn validation() {
        assert!(Constraints::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(Constraints::new(0.1, 0.0, 2.0, 1.0).is_err());
        assert!(PowerModel::new(0.0, 0.1, 0.1, 0.1).is_err());
        assert!(PowerModel::new(0.3, -0.1, 0.1, 0.1).is_err());
    }

    #[test]
    fn single_precision_allocation() {
        let ch = EffectiveChannel::<f32>::new(8, 10.0).unwrap();
        let a = allocate(Scheme::Sc, &ch, 8, &PowerModel::reference(), &Constraints::reference(1e-5));
        assert_eq!(a.regime, Regime::Interior);
        assert!((a.p0_star - 0.429_264).abs() < 1e-4);
    }
}
