//! Chain traces: per-iteration records plus running inclusion accumulators.
//!
//! States are stored as flip deltas with periodic full checkpoints, because k
//! can be large. Sample s of a run is the state *before* iteration s (so the
//! initial model is sample 1, matching the sampler's output convention), and
//! the inclusion accumulator covers samples with s > burn-in. Continuous-time
//! traces weight each sample by its waiting time.
//!
//! Wall times are recorded for reporting but are excluded from
//! [`ChainTrace::deterministic_eq`]: they are the one physically
//! non-reproducible field.

use crate::error::TraceError;
use crate::float::Real;
use crate::model::BinaryModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceKind {
    /// Discrete-time chain; samples are equally weighted.
    Discrete,
    /// Continuous-time chain; samples are weighted by waiting time.
    Continuous,
}

#[derive(Clone, Copy, Debug)]
pub struct TraceOptions {
    /// Full-state checkpoint every this many iterations.
    pub checkpoint_interval: usize,
    /// Record per-iteration flip deltas (needed to reconstruct states).
    pub record_deltas: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            checkpoint_interval: 1000,
            record_deltas: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChainTrace<S> {
    kind: TraceKind,
    k: usize,
    seed: u64,
    initial: BinaryModel,
    final_state: BinaryModel,
    checkpoint_interval: usize,
    // CSR-encoded flip sets, one row per iteration (empty when not recorded).
    delta_offsets: Vec<usize>,
    delta_indices: Vec<u32>,
    flip_counts: Vec<u32>,
    epsilons: Vec<S>,
    waiting_times: Vec<S>,
    wall_times: Vec<f64>,
    checkpoints: Vec<(usize, BinaryModel)>,
    burn_in_iterations: usize,
    // Inclusion accumulators over post-burn-in samples.
    ones_count: Vec<u64>,
    sample_count: u64,
    weighted_ones: Vec<S>,
    total_weight: S,
}

impl<S: Real> ChainTrace<S> {
    pub fn kind(&self) -> TraceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of iterations (transitions) recorded.
    pub fn len(&self) -> usize {
        self.flip_counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flip_counts.is_empty()
    }

    pub fn initial_state(&self) -> &BinaryModel {
        &self.initial
    }

    pub fn final_state(&self) -> &BinaryModel {
        &self.final_state
    }

    pub fn epsilons(&self) -> &[S] {
        &self.epsilons
    }

    pub fn waiting_times(&self) -> &[S] {
        &self.waiting_times
    }

    pub fn flip_counts(&self) -> &[u32] {
        &self.flip_counts
    }

    pub fn wall_times(&self) -> &[f64] {
        &self.wall_times
    }

    pub fn burn_in_iterations(&self) -> usize {
        self.burn_in_iterations
    }

    pub fn checkpoints(&self) -> &[(usize, BinaryModel)] {
        &self.checkpoints
    }

    pub fn has_deltas(&self) -> bool {
        !self.delta_offsets.is_empty()
    }

    /// Flip indices applied by iteration s (1-based).
    pub fn delta(&self, s: usize) -> Result<&[u32], TraceError> {
        if !self.has_deltas() {
            return Err(TraceError::DeltasNotRecorded);
        }
        if s == 0 || s > self.len() {
            return Err(TraceError::OutOfRange {
                iteration: s,
                len: self.len(),
            });
        }
        Ok(&self.delta_indices[self.delta_offsets[s - 1]..self.delta_offsets[s]])
    }

    /// State after iteration s (s = 0 gives the initial model), replayed from
    /// the nearest checkpoint.
    pub fn state_at(&self, s: usize) -> Result<BinaryModel, TraceError> {
        if s > self.len() {
            return Err(TraceError::OutOfRange {
                iteration: s,
                len: self.len(),
            });
        }
        if !self.has_deltas() {
            return Err(TraceError::DeltasNotRecorded);
        }
        let (cp_iter, cp_state) = self
            .checkpoints
            .iter()
            .rev()
            .find(|(iter, _)| *iter <= s)
            .expect("checkpoint 0 always present");
        let mut state = cp_state.clone();
        for step in cp_iter + 1..=s {
            for &i in self.delta(step)? {
                state.flip(i as usize);
            }
        }
        Ok(state)
    }

    /// Per-element posterior inclusion estimates from the post-burn-in
    /// accumulator (equal weights for discrete time, waiting-time weights for
    /// continuous time).
    pub fn inclusion_probabilities(&self) -> Result<Vec<f64>, TraceError> {
        match self.kind {
            TraceKind::Discrete => {
                if self.sample_count == 0 {
                    return Err(TraceError::EmptyPostBurnIn);
                }
                Ok(self
                    .ones_count
                    .iter()
                    .map(|&c| c as f64 / self.sample_count as f64)
                    .collect())
            }
            TraceKind::Continuous => {
                if !(self.total_weight > S::zero()) {
                    return Err(TraceError::EmptyPostBurnIn);
                }
                Ok(self
                    .weighted_ones
                    .iter()
                    .map(|&w| (w / self.total_weight).to_f64())
                    .collect())
            }
        }
    }

    /// Equality over the reproducible content of the trace. Wall times are
    /// measurements, not chain state, and are ignored.
    pub fn deterministic_eq(&self, other: &Self) -> bool
    where
        S: PartialEq,
    {
        self.kind == other.kind
            && self.k == other.k
            && self.seed == other.seed
            && self.initial == other.initial
            && self.final_state == other.final_state
            && self.delta_offsets == other.delta_offsets
            && self.delta_indices == other.delta_indices
            && self.flip_counts == other.flip_counts
            && self.epsilons == other.epsilons
            && self.waiting_times == other.waiting_times
            && self.checkpoints == other.checkpoints
            && self.burn_in_iterations == other.burn_in_iterations
            && self.ones_count == other.ones_count
            && self.sample_count == other.sample_count
            && self.weighted_ones == other.weighted_ones
            && self.total_weight == other.total_weight
    }
}

/// Incremental construction used by the samplers.
pub(crate) struct TraceBuilder<S> {
    trace: ChainTrace<S>,
    burn_in: BurnInRule<S>,
    record_deltas: bool,
}

pub(crate) enum BurnInRule<S> {
    /// Discard samples with s <= this iteration count.
    Iterations(usize),
    /// Discard samples whose holding interval starts before this process time.
    Time(S),
}

impl<S: Real> TraceBuilder<S> {
    pub fn new(
        kind: TraceKind,
        initial: &BinaryModel,
        seed: u64,
        burn_in: BurnInRule<S>,
        opts: &TraceOptions,
    ) -> Self {
        let k = initial.len();
        let burn_in_iterations = match &burn_in {
            BurnInRule::Iterations(n) => *n,
            BurnInRule::Time(_) => 0,
        };
        let trace = ChainTrace {
            kind,
            k,
            seed,
            initial: initial.clone(),
            final_state: initial.clone(),
            checkpoint_interval: opts.checkpoint_interval.max(1),
            delta_offsets: if opts.record_deltas { vec![0] } else { Vec::new() },
            delta_indices: Vec::new(),
            flip_counts: Vec::new(),
            epsilons: Vec::new(),
            waiting_times: Vec::new(),
            wall_times: Vec::new(),
            checkpoints: vec![(0, initial.clone())],
            burn_in_iterations,
            ones_count: vec![0; k],
            sample_count: 0,
            weighted_ones: vec![S::zero(); k],
            total_weight: S::zero(),
        };
        Self {
            trace,
            burn_in,
            record_deltas: opts.record_deltas,
        }
    }

    /// Records iteration `s` (1-based). `sample` is the state before the
    /// step, `after` the state following it; `start_time` is the process time
    /// at which the holding interval began (continuous chains).
    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        s: usize,
        sample: &BinaryModel,
        flips: &[u32],
        epsilon: Option<S>,
        waiting_time: Option<S>,
        start_time: S,
        wall_secs: f64,
        after: &BinaryModel,
    ) {
        debug_assert_eq!(s, self.trace.flip_counts.len() + 1);
        let counted = match &self.burn_in {
            BurnInRule::Iterations(n) => s > *n,
            BurnInRule::Time(t) => start_time >= *t,
        };
        if counted {
            match self.trace.kind {
                TraceKind::Discrete => {
                    self.trace.sample_count += 1;
                    for i in sample.ones() {
                        self.trace.ones_count[i as usize] += 1;
                    }
                }
                TraceKind::Continuous => {
                    let w = waiting_time.expect("continuous trace needs waiting times");
                    self.trace.total_weight += w;
                    for i in sample.ones() {
                        self.trace.weighted_ones[i as usize] += w;
                    }
                }
            }
        }
        if self.record_deltas {
            self.trace.delta_indices.extend_from_slice(flips);
            self.trace.delta_offsets.push(self.trace.delta_indices.len());
        }
        self.trace.flip_counts.push(flips.len() as u32);
        if let Some(e) = epsilon {
            self.trace.epsilons.push(e);
        }
        if let Some(w) = waiting_time {
            self.trace.waiting_times.push(w);
        }
        self.trace.wall_times.push(wall_secs);
        if s % self.trace.checkpoint_interval == 0 {
            self.trace.checkpoints.push((s, after.clone()));
        }
    }

    pub fn finish(mut self, final_state: &BinaryModel) -> ChainTrace<S> {
        self.trace.final_state = final_state.clone();
        self.trace
    }
}
