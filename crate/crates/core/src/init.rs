//! Parameter initializers.

use crate::autodiff::{Rng, Tensor};
use crate::scalar::Scalar;

/// Weight matrix uniform on `±1/sqrt(fan_in)`.
pub fn fan_in_uniform<T: Scalar>(rng: &mut Rng, fan_in: usize, fan_out: usize) -> Tensor<T> {
    let limit = 1.0 / (fan_in as f64).sqrt();
    rng.uniform_tensor(fan_in, fan_out, -limit, limit)
}

/// Bias row uniform on `±1/sqrt(fan_in)`.
pub fn bias_uniform<T: Scalar>(rng: &mut Rng, fan_in: usize, fan_out: usize) -> Tensor<T> {
    let limit = 1.0 / (fan_in as f64).sqrt();
    rng.uniform_tensor(1, fan_out, -limit, limit)
}
