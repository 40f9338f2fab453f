//! Conditional density regression with mixture density networks and
//! variational Bayesian networks, built on a small reverse-mode autodiff
//! core.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiations.

pub mod autodiff;
pub mod bnn;
pub mod data;
mod error;
pub mod init;
pub mod metrics;
pub mod mdn;
pub mod mixture;
mod scalar;

pub use error::{Error, Result};
pub use scalar::{log_sum_exp, normal_log_pdf, Scalar, HALF_LN_2PI};

pub type Tensor64 = autodiff::Tensor<f64>;
pub type Tensor32 = autodiff::Tensor<f32>;
pub type Tape64 = autodiff::Tape<f64>;
pub type Mixture64 = mixture::Mixture<f64>;
pub type MixtureParams64 = mdn::MixtureParams<f64>;
pub type MdnModel64 = mdn::MdnModel<f64>;
pub type MdnModel32 = mdn::MdnModel<f32>;
pub type BnnModel64 = bnn::BnnModel<f64>;
pub type BnnModel32 = bnn::BnnModel<f32>;
