//! The posterior evaluator interface and a small table-backed implementation.

use crate::error::EvalError;
use crate::float::Real;
use crate::model::BinaryModel;
use crate::rng::CounterRng;

/// Log posterior ratio evaluator over a binary model space.
///
/// `log_ratio(m, i)` returns log(p(m^i | y) / p(m | y)), the log ratio for
/// flipping element `i` of `m`. Implementations must be safe for concurrent
/// calls with distinct `i` against a frozen state; rate computation queries
/// all elements in parallel.
pub trait PosteriorModel<S: Real>: Sync {
    /// Number of elements k of the model space.
    fn dim(&self) -> usize;

    /// log(p(m^i | y) / p(m | y)).
    fn log_ratio(&self, m: &BinaryModel, index: usize) -> Result<S, EvalError>;
}

impl<S: Real, M: PosteriorModel<S> + ?Sized> PosteriorModel<S> for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn log_ratio(&self, m: &BinaryModel, index: usize) -> Result<S, EvalError> {
        (**self).log_ratio(m, index)
    }
}

/// Posterior given by an explicit table of log probabilities over the full
/// space, indexed by packed state. Only practical for small k; this is the
/// workhorse target for the exact oracle and its tests.
#[derive(Clone, Debug)]
pub struct TabledPosterior<S> {
    k: usize,
    log_probs: Vec<S>,
}

impl<S: Real> TabledPosterior<S> {
    /// Builds the table from unnormalized probabilities (normalization is
    /// irrelevant for ratios; `probabilities` normalizes for oracle use).
    pub fn from_probabilities(k: usize, probs: &[S]) -> Self {
        assert_eq!(probs.len(), 1 << k, "table must cover the 2^k states");
        assert!(
            probs.iter().all(|p| *p > S::zero()),
            "all state probabilities must be positive"
        );
        Self {
            k,
            log_probs: probs.iter().map(|p| p.ln()).collect(),
        }
    }

    pub fn from_log_probabilities(k: usize, log_probs: Vec<S>) -> Self {
        assert_eq!(log_probs.len(), 1 << k);
        Self { k, log_probs }
    }

    /// A random positive posterior: iid standard normal log probabilities
    /// scaled by `spread`. Any such table is reversible for the birth-death
    /// rates built from it.
    pub fn random(k: usize, spread: f64, seed: u64) -> Self {
        const STREAM: u64 = 0x7ab1ed;
        let rng = CounterRng::new(seed);
        let log_probs = (0..1usize << k)
            .map(|idx| S::from_f64(spread * rng.normal(STREAM, 0, idx as u64)))
            .collect();
        Self { k, log_probs }
    }

    /// The normalized probability table π.
    pub fn probabilities(&self) -> Vec<S> {
        let max = self
            .log_probs
            .iter()
            .cloned()
            .fold(S::neg_infinity(), S::max);
        let unnorm: Vec<S> = self.log_probs.iter().map(|lp| (*lp - max).exp()).collect();
        let total: S = unnorm.iter().cloned().sum();
        unnorm.into_iter().map(|p| p / total).collect()
    }

    pub fn log_prob(&self, m: &BinaryModel) -> S {
        self.log_probs[m.to_index()]
    }
}

impl<S: Real> PosteriorModel<S> for TabledPosterior<S> {
    fn dim(&self) -> usize {
        self.k
    }

    fn log_ratio(&self, m: &BinaryModel, index: usize) -> Result<S, EvalError> {
        let from = m.to_index();
        let to = from ^ (1 << index);
        Ok(self.log_probs[to] - self.log_probs[from])
    }
}
