//! Scalar abstraction shared by the polynomial and exact linear-algebra code.

use std::fmt::Debug;
use std::ops::Neg;

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Coefficient field for polynomials, frames and the curvature maps.
///
/// Floats give the fast path; `Rational64` and `BigRational` give exact
/// arithmetic for bracket identities and exponent algebra.
pub trait Scalar:
    Num + Neg<Output = Self> + Clone + Debug + PartialEq + ToPrimitive + FromPrimitive + Send + Sync + 'static
{
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer must be representable")
    }

    /// Converts a float; exact for dyadic values when `Self` is rational.
    fn from_real(v: f64) -> Self {
        Self::from_f64(v).expect("finite float must be representable")
    }

    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::one() / Self::from_int(2)
    }
}

impl<T> Scalar for T where
    T: Num + Neg<Output = T> + Clone + Debug + PartialEq + ToPrimitive + FromPrimitive + Send + Sync + 'static
{
}
