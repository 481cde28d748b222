use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float as NumFloat, FromPrimitive, ToPrimitive};

/// Scalar used for probabilities, entropies and scores.
///
/// Implemented for `f32` and `f64`. Library tolerances are written as `f64`
/// literals and converted with [`Float::of`].
pub trait Float:
    NumFloat + FromPrimitive + ToPrimitive + Sum + AddAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 constant representable")
    }

    /// Converts a count into this scalar type.
    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Float for f32 {}
impl Float for f64 {}

/// Tolerance used when checking that a vector of `n` values sums to one.
///
/// `base` is the requested tolerance; it is widened to a few ulps per term so
/// that the check stays meaningful for `f32`.
pub(crate) fn sum_tolerance<F: Float>(base: f64, n: usize) -> F {
    let ulps = F::epsilon() * F::count(4 * n.max(1));
    F::of(base).max(ulps)
}
