//! Numeric abstractions shared by the metric and network code.
//!
//! Counting statistics (accuracy, Jaccard, overlap rates, occurrence rates)
//! are ratios of integers, so they are generic over [`Fraction`], which is
//! implemented for `f32`, `f64` and exact rationals. Anything that needs a
//! logarithm or a square root asks for [`Real`] instead.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Float, Num, ToPrimitive};

/// A field-like scalar that can represent ratios of counts.
pub trait Fraction: Num + Copy + PartialOrd + Debug + Display + Send + Sync + 'static {
    fn from_count(n: usize) -> Self;

    fn ratio(num: usize, den: usize) -> Self {
        Self::from_count(num) / Self::from_count(den)
    }

    fn to_f64(self) -> f64;
}

/// Floating-point scalars: `f32` or `f64`.
pub trait Real: Fraction + Float {
    fn from_f64(v: f64) -> Self;
}

impl Fraction for f64 {
    fn from_count(n: usize) -> Self {
        n as f64
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Fraction for f32 {
    fn from_count(n: usize) -> Self {
        n as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
}

impl Real for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }
}

macro_rules! impl_fraction_for_ratio {
    ($($int:ty),*) => {$(
        impl Fraction for Ratio<$int> {
            fn from_count(n: usize) -> Self {
                Ratio::from_integer(n as $int)
            }
            fn to_f64(self) -> f64 {
                ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
            }
        }
    )*};
}

impl_fraction_for_ratio!(i64, i128, u64);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_is_exact() {
        let r: Ratio<i64> = Fraction::ratio(2, 6);
        assert_eq!(r, Ratio::new(1, 3));
        assert_eq!(<f64 as Fraction>::ratio(1, 4), 0.25);
    }
}
