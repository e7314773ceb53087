use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used for offers, utilities and statistics.
///
/// Implemented for `f32` and `f64`. The simulator itself runs on `f64`; the
/// utility model, concession curves and test statistics are generic so they
/// can be evaluated at lower precision when needed.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion to `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance used when checking that weights sum to one.
    fn weight_tolerance() -> Self {
        Self::of(1e-9).max(Self::epsilon() * Self::of(16.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `true` when `x` lies in the closed unit interval.
pub(crate) fn in_unit<S: Scalar>(x: S) -> bool {
    x >= S::zero() && x <= S::one()
}
