//! PAC-Bayes certificate for the variational posterior.
//!
//! The right-hand side is
//! `(1/N) Σ_i E_{w~q}[−ln p(y_i | x_i, w)] + (KL(q ‖ π) + ln(1/δ)) / N`.
//! The underlying inequality assumes a bounded loss; the Gaussian NLL is
//! not bounded, so the value is reported as an empirical certificate.

use crate::autodiff::{Rng, Tensor};
use crate::bnn::{expected_nll, BnnModel};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacBayesInputs<T> {
    pub empirical_expected_nll: T,
    pub kl_q_pi: T,
    pub n: usize,
    pub delta: T,
}

impl<T: Scalar> PacBayesInputs<T> {
    pub fn new(empirical_expected_nll: T, kl_q_pi: T, n: usize, delta: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::Contract("PAC-Bayes needs N ≥ 1".into()));
        }
        if !(delta > T::zero() && delta < T::one()) {
            return Err(Error::Contract(format!("delta {delta} must lie in (0, 1)")));
        }
        if !(kl_q_pi >= T::zero()) {
            return Err(Error::Contract(format!("KL(q‖π) = {kl_q_pi} must be nonnegative")));
        }
        Ok(Self { empirical_expected_nll, kl_q_pi, n, delta })
    }

    /// Inputs for a trained BNN: the expected NLL over `train` is
    /// estimated from `draws` posterior samples.
    pub fn for_model(model: &BnnModel<T>, train: &Dataset, draws: usize, delta: T, rng: &mut Rng) -> Result<Self> {
        let x: Vec<T> = train.x.iter().map(|&v| T::lit(v)).collect();
        let y: Vec<T> = train.y.iter().map(|&v| T::lit(v)).collect();
        let e = expected_nll(model, &Tensor::column(&x), &Tensor::column(&y), draws, rng)?;
        Self::new(e, model.kl_to_prior(), train.len(), delta)
    }
}

pub fn pac_bayes_rhs<T: Scalar>(inputs: &PacBayesInputs<T>) -> T {
    let n = T::lit(inputs.n as f64);
    inputs.empirical_expected_nll + (inputs.kl_q_pi + (T::one() / inputs.delta).ln()) / n
}
