use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::Serialize;

/// Floating-point type the whole lab is generic over.
///
/// Implemented for `f32` and `f64`; everything user-facing is aliased to
/// `f64` at the crate root.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Serialize
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the type cannot hold it.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal does not fit the scalar type")
    }

    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("count does not fit the scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
