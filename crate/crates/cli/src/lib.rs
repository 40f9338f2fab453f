//! Experiment runner behind the `probreg` binary.

pub mod config;
mod error;
pub mod run;
pub mod svg;
pub mod verify;

pub use error::CliError;
