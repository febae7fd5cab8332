//! The birth-death chain simulated through its embedded jump chain: one
//! Exponential(λ(m)) waiting-time draw plus one categorical draw per event,
//! which is distributionally identical to racing k exponentials.

use std::time::Instant;

use super::validate_burn_in;
use crate::error::SamplerError;
use crate::float::Real;
use crate::model::BinaryModel;
use crate::posterior::PosteriorModel;
use crate::rates::compute_rates;
use crate::rng::{streams, CounterRng};
use crate::trace::{BurnInRule, ChainTrace, TraceBuilder, TraceKind, TraceOptions};

/// Stopping rule for a birth-death run.
#[derive(Clone, Copy, Debug)]
pub enum BdBudget {
    /// Stop after this many jump events.
    Events(usize),
    /// Stop once accumulated process time reaches this value.
    TotalTime(f64),
}

#[derive(Clone, Debug)]
pub struct BdStepRecord<S> {
    pub event: usize,
    /// Time spent in the pre-jump state.
    pub waiting_time: S,
    /// Element flipped by the jump.
    pub flip: u32,
    /// Process time at which the holding interval began.
    pub start_time: S,
}

pub struct BdChain<'m, S: Real, M: PosteriorModel<S> + ?Sized> {
    model: &'m M,
    rng: CounterRng,
    state: BinaryModel,
    event: usize,
    elapsed: S,
}

impl<'m, S: Real, M: PosteriorModel<S> + ?Sized> BdChain<'m, S, M> {
    pub fn new(model: &'m M, initial: &BinaryModel, seed: u64) -> Result<Self, SamplerError> {
        if initial.len() != model.dim() {
            return Err(SamplerError::InvalidInput(format!(
                "initial model has {} elements, model space has {}",
                initial.len(),
                model.dim()
            )));
        }
        Ok(Self {
            model,
            rng: CounterRng::new(seed),
            state: initial.clone(),
            event: 0,
            elapsed: S::zero(),
        })
    }

    pub fn state(&self) -> &BinaryModel {
        &self.state
    }

    pub fn events(&self) -> usize {
        self.event
    }

    /// Accumulated process time.
    pub fn elapsed(&self) -> S {
        self.elapsed
    }

    pub fn step(&mut self) -> Result<BdStepRecord<S>, SamplerError> {
        let s = self.event + 1;
        let rates = compute_rates(self.model, &self.state)
            .map_err(|source| SamplerError::Eval { iteration: s, source })?;
        let u_wait = self.rng.uniform(streams::BD_WAIT, s as u64, 0);
        let waiting_time = -S::from_f64(u_wait).ln() / rates.total();
        let u_jump = self.rng.uniform(streams::BD_JUMP, s as u64, 0);
        let flip = rates.categorical_index(u_jump) as u32;
        let start_time = self.elapsed;
        self.state.flip(flip as usize);
        self.elapsed += waiting_time;
        self.event = s;
        Ok(BdStepRecord {
            event: s,
            waiting_time,
            flip,
            start_time,
        })
    }
}

/// Runs the birth-death chain and records a continuous-time trace: sample s
/// is the state holding during event s, weighted by its waiting time.
/// Posterior estimates are therefore time-averaged.
pub fn run_bd<S: Real, M: PosteriorModel<S> + ?Sized>(
    model: &M,
    initial: &BinaryModel,
    budget: BdBudget,
    burn_in: f64,
    seed: u64,
    opts: &TraceOptions,
) -> Result<ChainTrace<S>, SamplerError> {
    validate_burn_in(burn_in)?;
    let burn_rule = match budget {
        BdBudget::Events(n) => {
            if n == 0 {
                return Err(SamplerError::InvalidInput("event budget must be >= 1".into()));
            }
            BurnInRule::Iterations((burn_in * n as f64).floor() as usize)
        }
        BdBudget::TotalTime(t) => {
            if !(t > 0.0) {
                return Err(SamplerError::InvalidInput(format!(
                    "time budget {} must be positive",
                    t
                )));
            }
            BurnInRule::Time(S::from_f64(burn_in * t))
        }
    };
    let mut chain = BdChain::new(model, initial, seed)?;
    let mut builder = TraceBuilder::new(TraceKind::Continuous, initial, seed, burn_rule, opts);
    loop {
        match budget {
            BdBudget::Events(n) => {
                if chain.events() >= n {
                    break;
                }
            }
            BdBudget::TotalTime(t) => {
                if chain.events() > 0 && chain.elapsed().to_f64() >= t {
                    break;
                }
            }
        }
        let started = Instant::now();
        let sample = chain.state().clone();
        let rec = chain.step()?;
        builder.push(
            rec.event,
            &sample,
            &[rec.flip],
            None,
            Some(rec.waiting_time),
            rec.start_time,
            started.elapsed().as_secs_f64(),
            chain.state(),
        );
    }
    Ok(builder.finish(chain.state()))
}
