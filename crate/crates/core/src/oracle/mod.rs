//! Independent checks of the analytic model: Monte-Carlo simulation of the
//! fading channel and brute-force search for the energy-efficient optimum.
//!
//! Results are a deterministic function of `(seed, samples, inputs)`.
//! Parallel work is split into fixed chunks and merged through integer counts,
//! so the number of worker threads never changes an estimate.

mod grid;
mod rng;

use rand::Rng;
use rayon::prelude::*;

use crate::allocator::Scheme;
use crate::error::{Error, Result};
use crate::sir::{sir_threshold, ExplicitTopology};

pub use grid::{grid_search_optimum, GridOutcome, GridSpec, SearchMode, DEFAULT_GRID_POINTS};
use rng::{chunks, exp1, StreamFactory};

/// Sample count, seed and number of receive antennas for a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub samples: u64,
    pub seed: u64,
    pub antennas: u32,
}

impl SimConfig {
    pub fn new(samples: u64, seed: u64, antennas: u32) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        if antennas == 0 {
            return Err(Error::InvalidParameter("antennas must be at least 1".into()));
        }
        Ok(Self {
            samples,
            seed,
            antennas,
        })
    }
}

/// Empirical probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
    pub hits: u64,
    pub samples: u64,
}

impl Estimate {
    fn from_counts(hits: u64, samples: u64) -> Self {
        let n = samples as f64;
        let p = hits as f64 / n;
        Self {
            estimate: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
            hits,
            samples,
        }
    }

    /// Fewer than ten events make the standard error meaningless.
    pub fn is_reliable(&self) -> bool {
        self.hits >= 10
    }

    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (self.estimate - value).abs() <= k * self.std_error
    }
}

/// SIR on one antenna from explicit fading gains.
pub fn sir_from_gains(topo: &ExplicitTopology<f64>, p0: f64, signal_gain: f64, interferer_gains: &[f64]) -> f64 {
    let interference: f64 = topo
        .interferer_rx_powers()
        .iter()
        .zip(interferer_gains)
        .map(|(p, h)| p * h)
        .sum();
    p0 * topo.signal_path_loss() * signal_gain / interference
}

fn fill_sir<R: Rng>(topo: &ExplicitTopology<f64>, p0: f64, rng: &mut R, out: &mut [f64]) {
    let signal = p0 * topo.signal_path_loss();
    for sir in out.iter_mut() {
        let h0 = exp1(rng);
        let interference: f64 = topo
            .interferer_rx_powers()
            .iter()
            .map(|p| p * exp1(rng))
            .sum();
        *sir = signal * h0 / interference;
    }
}

/// Per-antenna SIRs of draw `draw_index`. Gains are drawn antenna by antenna,
/// signal first, then interferers in order.
pub fn sample_sir_vector(
    topo: &ExplicitTopology<f64>,
    p0: f64,
    antennas: u32,
    draw_index: u64,
    seed: u64,
) -> Vec<f64> {
    let mut rng = StreamFactory::new(seed).stream(draw_index);
    let mut out = vec![0.0; antennas as usize];
    fill_sir(topo, p0, &mut rng, &mut out);
    out
}

/// Combiner output `f(SIR)`: the best branch for SC/SSC, the sum for MRC.
pub fn combine(scheme: Scheme, sir: &[f64]) -> f64 {
    match scheme {
        Scheme::Sc | Scheme::Ssc => sir.iter().copied().fold(0.0, f64::max),
        Scheme::Mrc => sir.iter().sum(),
    }
}

fn draw_combined<R: Rng>(scheme: Scheme, topo: &ExplicitTopology<f64>, p0: f64, antennas: u32, rng: &mut R) -> f64 {
    let m = antennas as usize;
    let mut stack = [0.0f64; 64];
    if m <= stack.len() {
        fill_sir(topo, p0, rng, &mut stack[..m]);
        combine(scheme, &stack[..m])
    } else {
        let mut heap = vec![0.0; m];
        fill_sir(topo, p0, rng, &mut heap);
        combine(scheme, &heap)
    }
}

/// Counts indices in `0..samples` for which `event` fires, in parallel.
fn count_events<F>(samples: u64, seed: u64, event: F) -> u64
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> bool + Sync,
{
    let factory = StreamFactory::new(seed);
    let ranges: Vec<_> = chunks(samples).collect();
    ranges
        .into_par_iter()
        .map(|(start, end)| {
            (start..end)
                .filter(|&i| event(&mut factory.stream(i)))
                .count() as u64
        })
        .sum()
}

/// Values of `draw` for every index in `0..samples`, in index order.
fn collect_draws<F>(samples: u64, seed: u64, draw: F) -> Vec<f64>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    let factory = StreamFactory::new(seed);
    let ranges: Vec<_> = chunks(samples).collect();
    ranges
        .into_par_iter()
        .flat_map_iter(|(start, end)| {
            let factory = &factory;
            let draw = &draw;
            (start..end).map(move |i| draw(&mut factory.stream(i)))
        })
        .collect()
}

fn warn_if_unreliable(what: &str, e: &Estimate) {
    if !e.is_reliable() {
        log::warn!(
            "{what}: only {} events in {} samples; the estimate is unreliable",
            e.hits,
            e.samples
        );
    }
}

/// Fraction of draws whose combiner output falls below `2^r0 − 1`.
pub fn empirical_outage(
    scheme: Scheme,
    r0: f64,
    p0: f64,
    topo: &ExplicitTopology<f64>,
    sim: &SimConfig,
) -> Estimate {
    let threshold = sir_threshold(r0);
    let hits = count_events(sim.samples, sim.seed, |rng| {
        draw_combined(scheme, topo, p0, sim.antennas, rng) < threshold
    });
    let e = Estimate::from_counts(hits, sim.samples);
    warn_if_unreliable("empirical_outage", &e);
    e
}

/// Combiner outputs at `p0` for every draw, sorted ascending.
///
/// Since every SIR scales linearly with `p0`, the samples at unit power
/// determine the outage at any power.
pub fn sorted_combiner_samples(
    scheme: Scheme,
    p0: f64,
    topo: &ExplicitTopology<f64>,
    sim: &SimConfig,
) -> Vec<f64> {
    let mut v = collect_draws(sim.samples, sim.seed, |rng| {
        draw_combined(scheme, topo, p0, sim.antennas, rng)
    });
    v.par_sort_unstable_by(f64::total_cmp);
    v
}

/// Fraction of sorted samples strictly below `threshold`.
pub fn fraction_below(sorted: &[f64], threshold: f64) -> Estimate {
    let hits = sorted.partition_point(|&v| v < threshold) as u64;
    Estimate::from_counts(hits, sorted.len() as u64)
}

/// Empirical CDF of the single-antenna SIR at `gamma`.
pub fn empirical_per_antenna_cdf(gamma: f64, topo: &ExplicitTopology<f64>, p0: f64, samples: u64, seed: u64) -> Estimate {
    let hits = count_events(samples, seed, |rng| {
        let mut sir = [0.0];
        fill_sir(topo, p0, rng, &mut sir);
        sir[0] < gamma
    });
    Estimate::from_counts(hits, samples)
}

/// Empirical CDF at `x` of a sum of `M` i.i.d. Lomax(`κ`, 1) variables.
pub fn empirical_lomax_sum_cdf(x: f64, antennas: u32, kappa: u32, samples: u64, seed: u64) -> Estimate {
    let k = f64::from(kappa);
    let hits = count_events(samples, seed, |rng| {
        let sum: f64 = (0..antennas).map(|_| (exp1(rng) / k).exp_m1()).sum();
        sum < x
    });
    Estimate::from_counts(hits, samples)
}

/// Draws of a product of `M` i.i.d. Pareto-I(`κ`, 1) variables.
pub fn pareto_product_samples(antennas: u32, kappa: u32, samples: u64, seed: u64) -> Vec<f64> {
    let k = f64::from(kappa);
    collect_draws(samples, seed, |rng| {
        let log_sum: f64 = (0..antennas).map(|_| exp1(rng)).sum();
        (log_sum / k).exp()
    })
}
