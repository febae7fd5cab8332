//! Jump-aggressiveness sequences {ε_s}.
//!
//! The slow and fast decays are
//!   ε_s = ε₀ / log₁₀(s + 9)          (slow)
//!   ε_s = ε₀ · (1 / (s·log₂(s+1)))^0.4   (fast)
//! Both are non-increasing with ε_1 = ε₀. The fast decay additionally has a
//! divergent sum in the infinite horizon; only monotone decay and the (0,1)
//! range are asserted here.

use crate::error::ScheduleError;
use crate::float::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum EpsilonSchedule<S> {
    Constant { base: S },
    SlowDecay { base: S },
    FastDecay { base: S },
    Table { values: Vec<S> },
}

impl<S: Real> EpsilonSchedule<S> {
    pub fn constant(base: S) -> Result<Self, ScheduleError> {
        Self::check_base(base)?;
        Ok(Self::Constant { base })
    }

    pub fn slow_decay(base: S) -> Result<Self, ScheduleError> {
        Self::check_base(base)?;
        Ok(Self::SlowDecay { base })
    }

    pub fn fast_decay(base: S) -> Result<Self, ScheduleError> {
        Self::check_base(base)?;
        Ok(Self::FastDecay { base })
    }

    pub fn table(values: Vec<S>) -> Result<Self, ScheduleError> {
        if values.is_empty() {
            return Err(ScheduleError::InvalidParameter(
                "schedule table is empty".into(),
            ));
        }
        for (i, v) in values.iter().enumerate() {
            if !(*v > S::zero() && *v < S::one()) {
                return Err(ScheduleError::InvalidParameter(format!(
                    "table entry {} = {} outside (0, 1)",
                    i + 1,
                    v
                )));
            }
        }
        Ok(Self::Table { values })
    }

    fn check_base(base: S) -> Result<(), ScheduleError> {
        if base > S::zero() && base < S::one() {
            Ok(())
        } else {
            Err(ScheduleError::InvalidParameter(format!(
                "epsilon base {} outside (0, 1)",
                base
            )))
        }
    }

    /// ε_s for iteration s ≥ 1.
    pub fn evaluate(&self, s: usize) -> Result<S, ScheduleError> {
        assert!(s >= 1, "iterations are 1-based");
        match self {
            Self::Constant { base } => Ok(*base),
            Self::SlowDecay { base } => {
                let t = S::from_usize(s + 9);
                Ok(*base / t.log10())
            }
            Self::FastDecay { base } => {
                let s_ = S::from_usize(s);
                let inner = (S::from_usize(s + 1)).log2() * s_;
                Ok(*base * inner.recip().powf(S::from_f64(0.4)))
            }
            Self::Table { values } => {
                values
                    .get(s - 1)
                    .copied()
                    .ok_or(ScheduleError::TableExhausted {
                        iteration: s,
                        len: values.len(),
                    })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_returns_base() {
        let sched = EpsilonSchedule::constant(0.3f64).unwrap();
        assert_eq!(sched.evaluate(7).unwrap(), 0.3);
    }

    #[test]
    fn slow_decay_values() {
        let sched = EpsilonSchedule::slow_decay(0.3f64).unwrap();
        // s=1: 0.3 / log10(10) = 0.3
        assert_relative_eq!(sched.evaluate(1).unwrap(), 0.3, max_relative = 1e-14);
        // s=91: 0.3 / log10(100) = 0.15
        assert_relative_eq!(sched.evaluate(91).unwrap(), 0.15, max_relative = 1e-14);
    }

    #[test]
    fn fast_decay_values() {
        let sched = EpsilonSchedule::fast_decay(0.3f64).unwrap();
        // s=1: 0.3 * (1 / (1 * log2(2)))^0.4 = 0.3
        assert_relative_eq!(sched.evaluate(1).unwrap(), 0.3, max_relative = 1e-14);
        // s=3: 0.3 * (1 / (3 * log2(4)))^0.4 = 0.3 * 6^-0.4
        assert_relative_eq!(
            sched.evaluate(3).unwrap(),
            0.3 * 6f64.powf(-0.4),
            max_relative = 1e-14
        );
    }

    #[test]
    fn decays_are_monotone_and_in_range() {
        for sched in [
            EpsilonSchedule::slow_decay(0.95f64).unwrap(),
            EpsilonSchedule::fast_decay(0.95f64).unwrap(),
        ] {
            let mut prev = 1.0;
            for s in 1..10_000 {
                let e = sched.evaluate(s).unwrap();
                assert!(e > 0.0 && e < 1.0, "epsilon {} out of range at s={}", e, s);
                assert!(e <= prev + 1e-15, "not non-increasing at s={}", s);
                prev = e;
            }
        }
    }

    #[test]
    fn table_exhaustion_is_an_error() {
        let sched = EpsilonSchedule::table(vec![0.5f64, 0.25]).unwrap();
        assert_eq!(sched.evaluate(2).unwrap(), 0.25);
        assert!(matches!(
            sched.evaluate(3),
            Err(ScheduleError::TableExhausted { iteration: 3, len: 2 })
        ));
    }

    #[test]
    fn invalid_bases_rejected() {
        assert!(EpsilonSchedule::constant(1.5f64).is_err());
        assert!(EpsilonSchedule::constant(0.0f64).is_err());
        assert!(EpsilonSchedule::table(vec![0.5f64, 1.0]).is_err());
    }

    #[test]
    fn works_in_f32() {
        let sched = EpsilonSchedule::slow_decay(0.3f32).unwrap();
        assert!((sched.evaluate(91).unwrap() - 0.15).abs() < 1e-6);
    }
}
