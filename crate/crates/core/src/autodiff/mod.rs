//! Minimal reverse-mode autodiff, the Adam optimizer and a seeded PRNG.

mod adam;
mod rng;
mod tape;
mod tensor;

pub mod gradcheck;

pub use adam::{Adam, AdamConfig};
pub use rng::{splitmix64, Rng};
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;
