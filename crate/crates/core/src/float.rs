//! Scalar abstraction for the sampler and oracle math.
//!
//! Everything numeric in this crate is generic over [`Real`], a thin
//! extension of `num_traits::Float` with the special functions we need and
//! explicit `f64` conversions. `f32` and `f64` are provided; the crate root
//! exports `f64` aliases for the common types.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::Float;

pub trait Real:
    Float
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
    fn ln_gamma(self) -> Self;

    fn from_usize(v: usize) -> Self {
        Self::from_f64(v as f64)
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn ln_gamma(self) -> Self {
        libm::lgamma_r(self).0
    }
}

impl Real for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn ln_gamma(self) -> Self {
        libm::lgammaf_r(self).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        // Γ(n) = (n-1)!
        assert!((Real::ln_gamma(5.0f64) - 24.0f64.ln()).abs() < 1e-12);
        assert!((Real::ln_gamma(4.0f32) - 6.0f32.ln()).abs() < 1e-5);
    }
}
