//! Floating-point scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type the tensors, models and estimators are generic over.
///
/// Implemented for `f32` and `f64`. Training defaults to `f64`; see the
/// aliases at the crate root.
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
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal must be representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }

    /// `ln(1 + e^x)` without overflow for large `x`.
    #[inline]
    fn softplus(self) -> Self {
        if self > Self::zero() {
            self + (-self).exp().ln_1p()
        } else {
            self.exp().ln_1p()
        }
    }

    /// Logistic sigmoid, the derivative of [`Scalar::softplus`].
    #[inline]
    fn sigmoid(self) -> Self {
        if self >= Self::zero() {
            Self::one() / (Self::one() + (-self).exp())
        } else {
            let e = self.exp();
            e / (Self::one() + e)
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `0.5 * ln(2π)`, the constant term of the Gaussian log-density.
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Log-density of `N(mean, sd²)` at `y`.
#[inline]
pub fn normal_log_pdf<T: Scalar>(y: T, mean: T, sd: T) -> T {
    let z = (y - mean) / sd;
    -T::lit(HALF_LN_2PI) - sd.ln() - T::lit(0.5) * z * z
}

/// Stable `ln Σ exp(v_i)`; `-inf` for an empty slice.
pub fn log_sum_exp<T: Scalar>(values: &[T]) -> T {
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    if !max.is_finite() {
        return max;
    }
    let total: T = values.iter().map(|&v| (v - max).exp()).sum();
    max + total.ln()
}
