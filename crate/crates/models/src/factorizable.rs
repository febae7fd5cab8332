//! Fully factorizable posterior p(m|y) = Π_i p(m_i|y): the case where the
//! multiple-jump chain is exactly invariant at every ε.

use mjmc_core::{BinaryModel, EvalError, PosteriorModel, Real};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
#[error("marginal {value} at element {index} outside (0, 1)")]
pub struct InvalidMarginal {
    pub index: usize,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct FactorizableModel<S = f64> {
    marginals: Vec<S>,
    // ln(p_i/(1−p_i)), stored once so the two flip directions are exact
    // negations of each other.
    logits: Vec<S>,
}

impl<S: Real> FactorizableModel<S> {
    /// `marginals[i]` = p(m_i = 1 | y), each strictly inside (0, 1).
    pub fn new(marginals: Vec<S>) -> Result<Self, InvalidMarginal> {
        for (index, &p) in marginals.iter().enumerate() {
            if !(p > S::zero() && p < S::one()) {
                return Err(InvalidMarginal {
                    index,
                    value: p.to_f64(),
                });
            }
        }
        let logits = marginals.iter().map(|&p| (p / (S::one() - p)).ln()).collect();
        Ok(Self { marginals, logits })
    }

    pub fn marginals(&self) -> &[S] {
        &self.marginals
    }

    /// log(p(1−m_i | y) / p(m_i | y)).
    pub fn log_ratio_element(&self, m: &BinaryModel, index: usize) -> S {
        if m.get(index) {
            -self.logits[index]
        } else {
            self.logits[index]
        }
    }

    /// The induced probability of a full state; handy for exactness tests.
    pub fn state_probability(&self, m: &BinaryModel) -> S {
        self.marginals
            .iter()
            .enumerate()
            .map(|(i, &p)| if m.get(i) { p } else { S::one() - p })
            .fold(S::one(), |acc, x| acc * x)
    }
}

impl<S: Real> PosteriorModel<S> for FactorizableModel<S> {
    fn dim(&self) -> usize {
        self.marginals.len()
    }

    fn log_ratio(&self, m: &BinaryModel, index: usize) -> Result<S, EvalError> {
        Ok(self.log_ratio_element(m, index))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_marginal_gives_zero_ratio() {
        let model = FactorizableModel::new(vec![0.5f64]).unwrap();
        let m = BinaryModel::zeros(1);
        assert_eq!(model.log_ratio_element(&m, 0), 0.0);
        assert_eq!(model.log_ratio_element(&m.flipped(0), 0), 0.0);
    }

    #[test]
    fn strong_marginal_matches_log_nine() {
        let model = FactorizableModel::new(vec![0.9f64]).unwrap();
        let m = BinaryModel::zeros(1);
        assert!((model.log_ratio_element(&m, 0) - 9.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn flipping_twice_sums_to_zero() {
        let model = FactorizableModel::new(vec![0.9f64, 0.27, 0.66]).unwrap();
        for idx in 0..8 {
            let m = BinaryModel::from_index(idx, 3);
            for i in 0..3 {
                let fwd = model.log_ratio_element(&m, i);
                let bwd = model.log_ratio_element(&m.flipped(i), i);
                assert_eq!(fwd, -bwd);
            }
        }
    }

    #[test]
    fn rejects_degenerate_marginals() {
        assert!(FactorizableModel::new(vec![0.5f64, 1.0]).is_err());
        assert!(FactorizableModel::new(vec![0.0f64]).is_err());
    }
}
