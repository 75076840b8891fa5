use std::fmt::Write as _;

use simo_ee::allocator::{allocate, AllocationResult, Constraints, PowerModel};
use simo_ee::oracle::{empirical_outage, grid_search_optimum, GridSpec, SearchMode, SimConfig};
use simo_ee::sir::{
    mrc_sum_cdf_approx, mrc_sum_cdf_exact, mrc_sum_cdf_lower_bound, per_antenna_cdf_bound, per_antenna_cdf_exact,
    EffectiveChannel,
};
use simo_ee::{Regime, Scheme};

use crate::format::{json_num, num};
use crate::scenario::{Resolved, Scenario};
use crate::CliError;

/// Closed-form and grid EE must agree to this relative tolerance.
const GRID_EE_TOLERANCE: f64 = 1e-3;

fn run_allocation(r: &Resolved, scheme: Scheme) -> AllocationResult<f64> {
    allocate(scheme, &r.channel.effective(), r.antennas, &r.power, &r.limits)
}

/// One JSON record; infeasible allocations are still printed before exiting with 2.
pub fn cmd_allocate(scenario: &Scenario, scheme: Option<Scheme>) -> Result<String, (String, CliError)> {
    let r = scenario.resolve().map_err(|e| (String::new(), e))?;
    let scheme = scheme.unwrap_or(r.scheme);
    let a = run_allocation(&r, scheme);
    let record = serde_json::json!({
        "scheme": scheme.as_str(),
        "antennas": r.antennas,
        "epsilon": json_num(r.limits.epsilon),
        "p0_star_w": json_num(a.p0_star),
        "r0_star_bpshz": json_num(a.r0_star),
        "ee_star": json_num(a.ee_star),
        "omega": json_num(a.omega),
        "regime": a.regime.as_str(),
    });
    let text = format!("{record}\n");
    if a.is_feasible() {
        Ok(text)
    } else {
        Err((text, CliError::Infeasible))
    }
}

/// Scenario fields a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepVar {
    #[value(name = "epsilon")]
    Epsilon,
    #[value(name = "delta_db")]
    DeltaDb,
    #[value(name = "M")]
    Antennas,
    #[value(name = "p_r_w")]
    PR,
    #[value(name = "eta")]
    Eta,
}

#[derive(Debug, Clone, Copy)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub log: bool,
}

impl Range {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let Range { from, to, points, log } = *self;
        if points < 2 {
            return Err(CliError::Input(format!("--points must be at least 2, got {points}")));
        }
        if !(from.is_finite() && to.is_finite() && from < to) {
            return Err(CliError::Input(format!("need finite --from < --to, got {from} and {to}")));
        }
        if log && from <= 0.0 {
            return Err(CliError::Input(format!("--log needs --from > 0, got {from}")));
        }
        let n = points - 1;
        let mut v: Vec<f64> = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                if log {
                    from * (to / from).powf(t)
                } else {
                    from + (to - from) * t
                }
            })
            .collect();
        v[0] = from;
        v[n] = to;
        Ok(v)
    }
}

type Inputs = (EffectiveChannel<f64>, u32, PowerModel<f64>, Constraints<f64>);

fn with_var(base: &Resolved, var: SweepVar, value: f64) -> Result<Inputs, CliError> {
    let mut ch = base.channel.effective();
    let mut m = base.antennas;
    let mut pm = base.power;
    let mut c = base.limits;
    let bad = |e: simo_ee::Error| CliError::Input(format!("sweep value {value}: {e}"));
    match var {
        SweepVar::Epsilon => c.epsilon = value,
        SweepVar::DeltaDb => ch = EffectiveChannel::new(ch.kappa(), 10f64.powf(value / 10.0)).map_err(bad)?,
        SweepVar::Antennas => m = value as u32,
        SweepVar::PR => pm.p_r = value,
        SweepVar::Eta => pm.eta = value,
    }
    pm.validate().map_err(bad)?;
    c.validate().map_err(bad)?;
    Ok((ch, m, pm, c))
}

pub const SWEEP_HEADER: &str = "var,scheme,p0_star_w,r0_star_bpshz,ee_star,omega,regime";

/// CSV of optima over one scenario field, rows ordered by value then scheme.
pub fn cmd_sweep(scenario: &Scenario, var: SweepVar, range: Range, schemes: &[Scheme]) -> Result<String, CliError> {
    let base = scenario.resolve()?;
    let mut values = range.values()?;
    if var == SweepVar::Antennas {
        // antenna counts are integers; rounding can merge neighbouring points
        if range.from < 1.0 {
            return Err(CliError::Input("M sweep must start at 1 or above".into()));
        }
        values = values.iter().map(|v| v.round()).collect();
        values.dedup();
    }
    let mut schemes = schemes.to_vec();
    schemes.sort();
    schemes.dedup();

    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for &v in &values {
        let (ch, m, pm, c) = with_var(&base, var, v)?;
        for &s in &schemes {
            let a = allocate(s, &ch, m, &pm, &c);
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                num(v),
                s,
                num(a.p0_star),
                num(a.r0_star),
                num(a.ee_star),
                num(a.omega),
                a.regime
            )
            .unwrap();
        }
    }
    Ok(out)
}

/// Analytic CDF curves of the combiner output.
///
/// SC/SSC tabulate `P(max SIR < γ)` at transmit power `p0`, exact and bound;
/// MRC tabulates the normalised Lomax-sum CDF at `x` (exact, gamma
/// approximation, lower bound), which does not depend on `p0`.
pub fn cmd_dist(scenario: &Scenario, scheme: Scheme, range: Range, exact: bool, p0: f64) -> Result<String, CliError> {
    let r = scenario.resolve()?;
    if !(p0 > 0.0 && p0.is_finite()) {
        return Err(CliError::Input(format!("--p0 must be positive, got {p0}")));
    }
    if range.from < 0.0 {
        return Err(CliError::Input(format!("--from must be non-negative, got {}", range.from)));
    }
    let points = range.values()?;
    let ch = r.channel.effective();
    let m = r.antennas;
    let mut out = String::new();
    match scheme {
        Scheme::Sc | Scheme::Ssc => {
            let topo = match (exact, r.channel.topology()) {
                (true, None) => {
                    return Err(CliError::Input(
                        "--exact needs an explicit topology (signal_path_loss, interferer_rx_powers_uW)".into(),
                    ))
                }
                (_, topo) => topo,
            };
            out.push_str(if exact { "gamma,exact,bound\n" } else { "gamma,bound\n" });
            let mi = m as i32;
            for g in points {
                let bound = per_antenna_cdf_bound(g, &ch, p0).powi(mi);
                match topo.filter(|_| exact) {
                    Some(t) => {
                        let e = per_antenna_cdf_exact(g, t, p0).powi(mi);
                        writeln!(out, "{},{},{}", num(g), num(e), num(bound)).unwrap();
                    }
                    None => writeln!(out, "{},{}", num(g), num(bound)).unwrap(),
                }
            }
        }
        Scheme::Mrc => {
            let k = ch.kappa();
            out.push_str(if exact { "x,exact,approx,lower_bound\n" } else { "x,approx,lower_bound\n" });
            for x in points {
                let approx = mrc_sum_cdf_approx(x, m, k);
                let lower = mrc_sum_cdf_lower_bound(x, m, k);
                if exact {
                    let e = match mrc_sum_cdf_exact(x, m, k) {
                        Ok(v) => v,
                        Err(err) => {
                            log::warn!("exact MRC CDF at x = {x}: {err}");
                            f64::NAN
                        }
                    };
                    writeln!(out, "{},{},{},{}", num(x), num(e), num(approx), num(lower)).unwrap();
                } else {
                    writeln!(out, "{},{},{}", num(x), num(approx), num(lower)).unwrap();
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

/// Report comparing the closed-form allocation against simulation and grid
/// search. The report is printed even when a check fails (exit 3).
pub fn cmd_validate(
    scenario: &Scenario,
    scheme: Option<Scheme>,
    samples: u64,
    seed: u64,
    grid_points: usize,
) -> Result<String, (String, CliError)> {
    let input = |e: CliError| (String::new(), e);
    let r = scenario.resolve().map_err(input)?;
    let scheme = scheme.unwrap_or(r.scheme);
    let Some(topo) = r.channel.topology() else {
        return Err(input(CliError::Input(
            "validate needs an explicit topology (signal_path_loss, interferer_rx_powers_uW)".into(),
        )));
    };
    let sim = SimConfig::new(samples, seed, r.antennas).map_err(|e| input(CliError::Input(e.to_string())))?;
    let grid = GridSpec::with_p0_points(grid_points);
    let ch = r.channel.effective();
    let eps = r.limits.epsilon;

    let a = run_allocation(&r, scheme);
    let mut out = String::new();
    writeln!(
        out,
        "# scheme={} antennas={} epsilon={} samples={} seed={} grid_points={}",
        scheme,
        r.antennas,
        num(eps),
        samples,
        seed,
        grid_points
    )
    .unwrap();
    writeln!(
        out,
        "# p0_star_w={} r0_star_bpshz={} ee_star={} regime={}",
        num(a.p0_star),
        num(a.r0_star),
        num(a.ee_star),
        a.regime
    )
    .unwrap();
    if !a.is_feasible() {
        return Err((out, CliError::Infeasible));
    }

    out.push_str("check,measured,lower,upper,status,detail\n");
    let mut statuses = Vec::new();

    let e = empirical_outage(scheme, a.r0_star, a.p0_star, topo, &sim);
    // A clamped-low optimum sits strictly inside the reliability region, so
    // only the upper side is meaningful there.
    let lower = if a.regime == Regime::ClampedLow { 0.0 } else { 0.5 * eps };
    let upper = 1.1 * eps;
    let status = if !e.is_reliable() {
        Status::Inconclusive
    } else if (lower..=upper).contains(&e.estimate) {
        Status::Pass
    } else {
        Status::Fail
    };
    statuses.push(status);
    writeln!(
        out,
        "reliability,{},{},{},{},hits={} std_error={}",
        num(e.estimate),
        num(lower),
        num(upper),
        status.as_str(),
        e.hits,
        num(e.std_error)
    )
    .unwrap();

    let g = grid_search_optimum(scheme, r.antennas, &r.power, &r.limits, &grid, SearchMode::AnalyticCurve(&ch))
        .map_err(|e| input(CliError::Input(format!("grid search: {e}"))))?;
    let (lo, hi) = (a.ee_star * (1.0 - GRID_EE_TOLERANCE), a.ee_star * (1.0 + GRID_EE_TOLERANCE));
    let status = if (lo..=hi).contains(&g.best.ee_star) { Status::Pass } else { Status::Fail };
    statuses.push(status);
    writeln!(
        out,
        "grid_ee,{},{},{},{},p0_grid_w={} step_ratio={}",
        num(g.best.ee_star),
        num(lo),
        num(hi),
        status.as_str(),
        num(g.best.p0_star),
        num(g.p0_step_ratio)
    )
    .unwrap();

    if statuses.iter().all(|&s| s == Status::Pass) {
        Ok(out)
    } else if statuses.contains(&Status::Fail) {
        Err((out, CliError::Validation("at least one check failed".into())))
    } else {
        Err((out, CliError::Validation("a check was inconclusive".into())))
    }
}
