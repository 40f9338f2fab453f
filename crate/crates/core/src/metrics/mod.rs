mod divergence;
mod pac_bayes;
pub mod quadrature;
pub mod table1;

pub use divergence::{
    gaussian_kl, mc_kl, mc_kl_mixtures, mixture_kl_upper_bound, renyi_divergence, DensityHandle, McKl, DENSITY_FLOOR,
};
pub use pac_bayes::{pac_bayes_rhs, PacBayesInputs};
pub use table1::{median, run_experiment, table1_nll, ModelKind, Protocol, RunOutcome, TrainedModel};
