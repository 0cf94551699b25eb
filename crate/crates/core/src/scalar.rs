//! Scalar abstraction shared by the numerical modules.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Bundles what the linear-algebra backend needs (`RealField`) with the
/// num-traits conversions used for literals and for reporting.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + std::fmt::Display + Send + Sync + 'static
{
    /// Literal conversion; every literal used in the crate is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn from_index(n: i64) -> Self {
        Self::from_i64(n).expect("index representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Largest finite value, used to pick rescaling thresholds.
    fn largest() -> Self;

    /// Smallest positive normal value.
    fn tiniest() -> Self;
}

impl Real for f64 {
    fn largest() -> Self {
        f64::MAX
    }
    fn tiniest() -> Self {
        f64::MIN_POSITIVE
    }
}

impl Real for f32 {
    fn largest() -> Self {
        f32::MAX
    }
    fn tiniest() -> Self {
        f32::MIN_POSITIVE
    }
}
