//! The three chain drivers: multiple-jump, birth-death, and MH-corrected.

mod birth_death;
mod mh;
mod multiple_jump;

pub use birth_death::{run_bd, BdBudget, BdChain, BdStepRecord};
pub use mh::{mh_corrected_step, run_mh_mcmc, MhChain, MhStepRecord};
pub use multiple_jump::{mj_step, run_mj_mcmc, run_mj_mcmc_with_observer, MjChain, MjStepRecord};

use crate::error::SamplerError;

/// Burn-in cap on the number of flips per iteration.
///
/// The flip limit is ⌈r·k⌉ while active (the first `active_iterations`
/// iterations); a sampled flip set above the limit is subsampled uniformly.
/// This perturbs the kernel, so by default it applies only inside the burn-in
/// window and the bias stays confined to discarded samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxJumpCap {
    fraction: f64,
    active_iterations: usize,
}

impl MaxJumpCap {
    pub const DEFAULT_ACTIVE_ITERATIONS: usize = 5;

    pub fn new(fraction: f64, active_iterations: usize) -> Result<Self, SamplerError> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(SamplerError::InvalidInput(format!(
                "max-jump fraction {} outside (0, 1]",
                fraction
            )));
        }
        Ok(Self {
            fraction,
            active_iterations,
        })
    }

    /// Cap with the default five-iteration window.
    pub fn with_default_window(fraction: f64) -> Result<Self, SamplerError> {
        Self::new(fraction, Self::DEFAULT_ACTIVE_ITERATIONS)
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn active_iterations(&self) -> usize {
        self.active_iterations
    }

    pub fn is_active(&self, iteration: usize) -> bool {
        iteration <= self.active_iterations
    }

    /// ⌈r·k⌉, at least 1.
    pub fn flip_limit(&self, k: usize) -> usize {
        ((self.fraction * k as f64).ceil() as usize).max(1)
    }
}

pub(crate) fn validate_burn_in(burn_in: f64) -> Result<(), SamplerError> {
    if (0.0..1.0).contains(&burn_in) {
        Ok(())
    } else {
        Err(SamplerError::InvalidInput(format!(
            "burn-in fraction {} outside [0, 1)",
            burn_in
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flip_limit_rounds_up_and_stays_positive() {
        let cap = MaxJumpCap::new(0.0025, 5).unwrap();
        assert_eq!(cap.flip_limit(1225), 4); // ceil(3.0625)
        assert_eq!(cap.flip_limit(10), 1); // ceil(0.025) -> 1
        let full = MaxJumpCap::new(1.0, 5).unwrap();
        assert_eq!(full.flip_limit(10), 10);
    }

    #[test]
    fn activity_window() {
        let cap = MaxJumpCap::with_default_window(0.5).unwrap();
        assert!(cap.is_active(1));
        assert!(cap.is_active(5));
        assert!(!cap.is_active(6));
    }

    #[test]
    fn invalid_fraction_rejected() {
        assert!(MaxJumpCap::new(0.0, 5).is_err());
        assert!(MaxJumpCap::new(1.5, 5).is_err());
    }
}
