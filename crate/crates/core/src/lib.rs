//! Joint transmit-power and rate allocation for an interference-limited SIMO
//! link that maximises energy efficiency under an outage-probability target.
//!
//! The crate is organised bottom-up:
//!
//! - [`special`]: Lambert W (main branch), incomplete gamma, factorial roots.
//! - [`quadrature`]: adaptive Gauss–Kronrod integration.
//! - [`sir`]: per-antenna SIR distributions and the SC/SSC/MRC combiner laws.
//! - [`allocator`]: the reliability curve, feasibility, and the Lambert-W optimum.
//! - [`asymptotics`]: ultra-reliable (ε → 0) gaps between combining schemes.
//! - [`oracle`]: Monte-Carlo channel simulation and brute-force grid search.
//!
//! Every analytic kernel is generic over [`Real`] (`f32` or `f64`). The
//! aliases below fix the scalar to `f64`, which is what the simulation oracle
//! and the command-line front end use.

// `!(x > 0)` is how NaN gets rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocator;
pub mod asymptotics;
pub mod error;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod sir;
pub mod special;

pub use allocator::{Regime, Scheme};
pub use error::{Error, Result};
pub use scalar::Real;

/// Explicit interference topology in double precision.
pub type Topology = sir::ExplicitTopology<f64>;
/// Effective `(κ, δ)` channel in double precision.
pub type Channel = sir::EffectiveChannel<f64>;
/// Circuit and amplifier power model in double precision.
pub type Power = allocator::PowerModel<f64>;
/// Reliability, rate and power limits in double precision.
pub type Limits = allocator::Constraints<f64>;
/// Allocation outcome in double precision.
pub type Allocation = allocator::AllocationResult<f64>;

/// Single-precision effective channel, for embedded callers.
pub type Channel32 = sir::EffectiveChannel<f32>;
/// Single-precision power model.
pub type Power32 = allocator::PowerModel<f32>;
