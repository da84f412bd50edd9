//! Numeric abstraction shared by schedules, transition tables and chromosomes.
//!
//! Everything that carries a time or a probability is generic over [`Scalar`].
//! `f64` is the working type for training, `f32` is supported for compact
//! models, and [`num_rational::Rational64`] gives exact schedule arithmetic.

use std::fmt::Debug;

use num_rational::{Rational32, Rational64};
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// A real-like number usable for times, probabilities and genes.
pub trait Scalar:
    Num + PartialOrd + Copy + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Allowed deviation of a probability row sum from 1.
    const SUM_TOLERANCE: f64;

    /// Lossy conversion from `f64`. Panics only if the target cannot
    /// represent a finite value at all.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("scalar type cannot represent a finite f64")
    }

    #[inline]
    fn from_seconds(value: u32) -> Self {
        Self::from_u32(value).expect("scalar type cannot represent an integer separation")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    #[inline]
    fn abs_diff(self, other: Self) -> Self {
        if self >= other {
            self - other
        } else {
            other - self
        }
    }
}

impl Scalar for f64 {
    const SUM_TOLERANCE: f64 = 1e-9;
}

// single precision cannot resolve 1e-9 around 1.0
impl Scalar for f32 {
    const SUM_TOLERANCE: f64 = 1e-5;
}

impl Scalar for Rational64 {
    const SUM_TOLERANCE: f64 = 1e-12;
}

impl Scalar for Rational32 {
    const SUM_TOLERANCE: f64 = 1e-12;
}
