//! Metropolis-Hastings correction of the multiple-jump proposal.
//!
//! The homogeneous multiple-jump kernel is used as a proposal and the move is
//! accepted with probability
//!   α(m, m') = min{1, π(m')·P_ε(m',m) / (π(m)·P_ε(m,m'))},
//! which makes the chain exact for the posterior at any fixed ε, at the cost
//! of rejections.

use std::time::Instant;

use super::validate_burn_in;
use crate::error::SamplerError;
use crate::float::Real;
use crate::model::BinaryModel;
use crate::posterior::PosteriorModel;
use crate::rates::{compute_rates, RateVector};
use crate::rng::{streams, CounterRng};
use crate::trace::{BurnInRule, ChainTrace, TraceBuilder, TraceKind, TraceOptions};

/// log P_ε(a, ·) for the flip set `h` (ascending indices), given the rates at
/// the source state `a`.
fn log_kernel<S: Real>(rates: &RateVector<S>, epsilon: S, h: &[u32]) -> S {
    let mut acc = S::zero();
    let mut next_flip = 0;
    for i in 0..rates.len() {
        let q_eps = rates.get(i) * epsilon;
        if next_flip < h.len() && h[next_flip] as usize == i {
            acc += q_eps.ln();
            next_flip += 1;
        } else {
            acc += (S::one() - q_eps).ln();
        }
    }
    acc
}

#[derive(Clone, Debug)]
pub struct MhStepRecord<S> {
    pub iteration: usize,
    /// Flips actually applied (empty on rejection or an empty proposal).
    pub flips: Vec<u32>,
    pub accepted: bool,
    pub epsilon: S,
}

/// One MH-corrected step from `m`, with `rates_at_m` already computed there.
/// Returns the next state and the step record.
pub fn mh_corrected_step<S: Real, M: PosteriorModel<S> + ?Sized>(
    m: &BinaryModel,
    rates_at_m: &RateVector<S>,
    epsilon: S,
    model: &M,
    rng: &CounterRng,
    iteration: usize,
) -> Result<(BinaryModel, MhStepRecord<S>), SamplerError> {
    let eval_err = |source| SamplerError::Eval {
        iteration,
        source,
    };
    // Uncapped multiple-jump proposal.
    let (proposal, flips) = super::mj_step(m, rates_at_m, epsilon, None, rng, iteration);
    if flips.is_empty() {
        // m' = m: the ratio is 1 and the step is a self-transition.
        return Ok((
            proposal,
            MhStepRecord {
                iteration,
                flips,
                accepted: true,
                epsilon,
            },
        ));
    }
    let rates_at_proposal = compute_rates(model, &proposal).map_err(eval_err)?;
    // log π(m')/π(m), accumulated along the flip path through intermediate
    // states (exactness needs the ratio of the actual posterior, not the
    // product of single-flip ratios at m).
    let mut log_pi_ratio = S::zero();
    let mut walker = m.clone();
    for &i in &flips {
        log_pi_ratio += model.log_ratio(&walker, i as usize).map_err(eval_err)?;
        walker.flip(i as usize);
    }
    debug_assert_eq!(walker, proposal);
    let log_forward = log_kernel(rates_at_m, epsilon, &flips);
    let log_backward = log_kernel(&rates_at_proposal, epsilon, &flips);
    let log_alpha = log_pi_ratio + log_backward - log_forward;
    let accepted = log_alpha >= S::zero() || {
        let u = rng.uniform(streams::MH_ACCEPT, iteration as u64, 0);
        S::from_f64(u).ln() < log_alpha
    };
    if accepted {
        Ok((
            proposal,
            MhStepRecord {
                iteration,
                flips,
                accepted: true,
                epsilon,
            },
        ))
    } else {
        Ok((
            m.clone(),
            MhStepRecord {
                iteration,
                flips: Vec::new(),
                accepted: false,
                epsilon,
            },
        ))
    }
}

/// Stepping interface to the MH-corrected chain (homogeneous ε only).
pub struct MhChain<'m, S: Real, M: PosteriorModel<S> + ?Sized> {
    model: &'m M,
    epsilon: S,
    rng: CounterRng,
    state: BinaryModel,
    iteration: usize,
}

impl<'m, S: Real, M: PosteriorModel<S> + ?Sized> MhChain<'m, S, M> {
    pub fn new(
        model: &'m M,
        initial: &BinaryModel,
        epsilon: S,
        seed: u64,
    ) -> Result<Self, SamplerError> {
        if initial.len() != model.dim() {
            return Err(SamplerError::InvalidInput(format!(
                "initial model has {} elements, model space has {}",
                initial.len(),
                model.dim()
            )));
        }
        if !(epsilon > S::zero() && epsilon < S::one()) {
            return Err(SamplerError::InvalidInput(format!(
                "epsilon {} outside (0, 1)",
                epsilon
            )));
        }
        Ok(Self {
            model,
            epsilon,
            rng: CounterRng::new(seed),
            state: initial.clone(),
            iteration: 0,
        })
    }

    pub fn state(&self) -> &BinaryModel {
        &self.state
    }

    pub fn step(&mut self) -> Result<MhStepRecord<S>, SamplerError> {
        let s = self.iteration + 1;
        let rates = compute_rates(self.model, &self.state)
            .map_err(|source| SamplerError::Eval { iteration: s, source })?;
        let (next, rec) =
            mh_corrected_step(&self.state, &rates, self.epsilon, self.model, &self.rng, s)?;
        self.state = next;
        self.iteration = s;
        Ok(rec)
    }
}

/// Runs the MH-corrected chain with constant ε and records a discrete-time
/// trace (same sample convention as the multiple-jump runner).
pub fn run_mh_mcmc<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    initial: &BinaryModel,
    epsilon: S,
    iterations: usize,
    burn_in: f64,
    seed: u64,
    opts: &TraceOptions,
) -> Result<ChainTrace<S>, SamplerError> {
    if iterations == 0 {
        return Err(SamplerError::InvalidInput("iterations must be >= 1".into()));
    }
    validate_burn_in(burn_in)?;
    let burn_in_iters = (burn_in * iterations as f64).floor() as usize;
    let mut chain = MhChain::new(model, initial, epsilon, seed)?;
    let mut builder = TraceBuilder::new(
        TraceKind::Discrete,
        initial,
        seed,
        BurnInRule::Iterations(burn_in_iters),
        opts,
    );
    for s in 1..=iterations {
        let started = Instant::now();
        let sample = chain.state().clone();
        let rec = chain.step()?;
        builder.push(
            s,
            &sample,
            &rec.flips,
            Some(rec.epsilon),
            None,
            S::zero(),
            started.elapsed().as_secs_f64(),
            chain.state(),
        );
    }
    Ok(builder.finish(chain.state()))
}
