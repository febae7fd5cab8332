//! MCMC samplers for Bayesian model inference on binary model spaces.
//!
//! The core objects are a binary model state m ∈ {0,1}^k, birth-death rates
//! q_i(m) = min{1, p(m^i|y)/p(m|y)} supplied by a [`PosteriorModel`]
//! evaluator, and three chains built from them:
//!
//! * [`run_mj_mcmc`] — the multiple-jump chain, which flips every element
//!   independently with probability q_i(m)·ε_s per iteration and can cross
//!   the whole space in one step;
//! * [`run_bd`] — the classical birth-death chain (continuous time, one flip
//!   per event), serving as the baseline;
//! * [`run_mh_mcmc`] — the MH-corrected variant of the multiple-jump chain,
//!   exact for the posterior at any fixed ε.
//!
//! The [`oracle`] module enumerates small spaces (k ≤ 12) exactly and turns
//! the theory — O(ε) stationary bias, waiting-time and jump-probability
//! limits, inhomogeneous convergence, factorizable exactness — into
//! machine-checkable reports.
//!
//! All randomness is counter-addressed ([`CounterRng`]): a run with a given
//! seed is bit-reproducible for any thread count.
//!
//! Math is generic over the scalar type via [`Real`] (`f32` or `f64`); the
//! aliases below fix the default `f64` instantiations.

pub mod error;
pub mod float;
pub mod model;
pub mod oracle;
pub mod posterior;
pub mod rates;
pub mod rng;
pub mod sampler;
pub mod schedule;
pub mod trace;

pub use error::{EvalError, OracleError, SamplerError, ScheduleError, TraceError};
pub use float::Real;
pub use model::BinaryModel;
pub use posterior::{PosteriorModel, TabledPosterior};
pub use rates::{compute_rates, RateVector, RATE_FLOOR};
pub use rng::CounterRng;
pub use sampler::{
    mh_corrected_step, mj_step, run_bd, run_mh_mcmc, run_mj_mcmc, run_mj_mcmc_with_observer,
    BdBudget, BdChain, MaxJumpCap, MhChain, MjChain,
};
pub use schedule::EpsilonSchedule;
pub use trace::{ChainTrace, TraceKind, TraceOptions};

/// Default `f64` instantiations of the scalar-generic types.
pub type Schedule = EpsilonSchedule<f64>;
pub type Rates = RateVector<f64>;
pub type Trace = ChainTrace<f64>;
pub type DenseKernel = oracle::DenseKernel<f64>;
pub type DistributionVector = oracle::DistributionVector<f64>;
