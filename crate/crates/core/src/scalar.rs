use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used throughout the pipeline: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Converts an `f64` constant, panicking only if the value is not representable.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("constant representable in scalar type")
    }

    /// Converts a count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Floor applied to zero distances and zero deviation sums inside density formulas.
    fn clamp_eps() -> Self {
        Self::lit(1e-12)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Total order on finite scalars; NaN compares equal to everything.
#[inline]
pub(crate) fn cmp_scalar<T: Scalar>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}
