//! Scalar abstraction for the numeric parts of the toolkit.
//!
//! Scoring, boosting and evaluation are written once against [`Scalar`] and
//! instantiated for `f32` and `f64`. File formats and pipelines work in `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type usable by the scoring and evaluation code.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Widens to `f64` for reporting.
    #[inline]
    fn widen(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
}

/// Arithmetic mean; zero for an empty input.
pub fn mean<S: Scalar>(values: impl IntoIterator<Item = S>) -> S {
    let mut n = 0usize;
    let mut total = S::zero();
    for v in values {
        total = total + v;
        n += 1;
    }
    if n == 0 {
        S::zero()
    } else {
        total / S::count(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_conversion() {
        assert_eq!(f32::lit(0.5), 0.5f32);
        assert_eq!(f64::count(3), 3.0);
    }

    #[test]
    fn mean_of_empty_is_zero() {
        assert_eq!(mean::<f64>(Vec::new()), 0.0);
        assert_eq!(mean([1.0f32, 2.0, 3.0]), 2.0);
    }
}
