//! Error types shared across the sampler and oracle modules.

use thiserror::Error;

/// Failure of a posterior evaluator for a single-element flip.
#[derive(Debug, Clone, Error)]
pub enum EvalError {
    #[error("non-finite log posterior ratio {value} at element {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("model evaluation failed at element {index}: {reason}")]
    Evaluation { index: usize, reason: String },
}

impl EvalError {
    pub fn evaluation(index: usize, reason: impl Into<String>) -> Self {
        Self::Evaluation {
            index,
            reason: reason.into(),
        }
    }

    pub fn index(&self) -> usize {
        match self {
            Self::NonFinite { index, .. } | Self::Evaluation { index, .. } => *index,
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum ScheduleError {
    #[error("epsilon schedule table exhausted: iteration {iteration} > table length {len}")]
    TableExhausted { iteration: usize, len: usize },
    #[error("invalid schedule parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("model evaluation failed at iteration {iteration}: {source}")]
    Eval {
        iteration: usize,
        #[source]
        source: EvalError,
    },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("invalid sampler input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("state space 2^{k} exceeds the exact-oracle capacity (k <= {max})")]
    SpaceTooLarge { k: usize, max: usize },
    #[error("fixed-point solve did not converge: residual {residual} after {sweeps} sweeps")]
    NoConvergence { residual: f64, sweeps: usize },
    #[error("distribution length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("kernel kind {found} not valid here, expected {expected}")]
    WrongKind { expected: String, found: String },
    #[error("invalid oracle input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Error)]
pub enum TraceError {
    #[error("no samples after the burn-in window")]
    EmptyPostBurnIn,
    #[error("flip deltas were not recorded for this trace")]
    DeltasNotRecorded,
    #[error("iteration {iteration} out of range (trace has {len})")]
    OutOfRange { iteration: usize, len: usize },
}
