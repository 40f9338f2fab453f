//! Divergences between conditional densities.

use crate::autodiff::Rng;
use crate::bnn::FrozenPredictive;
use crate::data::Case;
use crate::error::{Error, Result};
use crate::mdn::MdnModel;
use crate::mixture::Mixture;
use crate::scalar::Scalar;

use super::quadrature::Grid;

/// Smallest density value taken into a logarithm by [`mc_kl`].
pub const DENSITY_FLOOR: f64 = 1e-300;

/// `KL(N(μ₁, s₁²) ‖ N(μ₂, s₂²)) = ln(s₂/s₁) + (s₁² + (μ₁ − μ₂)²)/(2 s₂²) − 1/2`.
pub fn gaussian_kl<T: Scalar>(mu1: T, s1: T, mu2: T, s2: T) -> Result<T> {
    if !(s1 > T::zero()) || !(s2 > T::zero()) {
        return Err(Error::domain("gaussian_kl", format!("scales must be positive, got {s1} and {s2}")));
    }
    let half = T::lit(0.5);
    let d = mu1 - mu2;
    Ok((s2 / s1).ln() + (s1 * s1 + d * d) / (T::lit(2.0) * s2 * s2) - half)
}

/// Upper bound on `KL(f ‖ g)` for mixtures with index-matched components:
/// `KL(π ‖ π̃) + Σ_k π_k KL(f_k ‖ g_k)`.
pub fn mixture_kl_upper_bound<T: Scalar>(f: &Mixture<T>, g: &Mixture<T>) -> Result<T> {
    if f.k() != g.k() {
        return Err(Error::Contract(format!("component counts differ: {} vs {}", f.k(), g.k())));
    }
    let mut bound = T::zero();
    for k in 0..f.k() {
        let (pf, pg) = (f.weights()[k], g.weights()[k]);
        if pf == T::zero() {
            continue;
        }
        let comp = gaussian_kl(f.means()[k], f.stds()[k], g.means()[k], g.stds()[k])?;
        bound = bound + pf * (pf / pg).ln() + pf * comp;
    }
    Ok(bound)
}

/// A conditional density `d(y | x)` that can be evaluated and sampled.
#[derive(Debug, Clone, Copy)]
pub enum DensityHandle<'a> {
    True(Case),
    Mdn(&'a MdnModel<f64>),
    /// Predictive averaged over a fixed set of posterior draws.
    Bnn(&'a FrozenPredictive<f64>),
}

impl DensityHandle<'_> {
    /// The conditional at `x`; every variant is a Gaussian mixture.
    pub fn at(&self, x: f64) -> Result<Mixture<f64>> {
        match self {
            DensityHandle::True(case) => Ok(case.conditional(x)),
            DensityHandle::Mdn(model) => model.mixture_at(x),
            DensityHandle::Bnn(pred) => pred.mixture_at(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McKl {
    pub value: f64,
    pub std_error: f64,
    /// How many `q` evaluations fell below [`DENSITY_FLOOR`].
    pub floored: usize,
}

/// `(1/n) Σ ln(p(Y_j)/q(Y_j))` with `Y_j ~ p(· | x)`.
pub fn mc_kl(p: &DensityHandle<'_>, q: &DensityHandle<'_>, x: f64, n_samples: usize, rng: &mut Rng) -> Result<McKl> {
    mc_kl_mixtures(&p.at(x)?, &q.at(x)?, n_samples, rng)
}

pub fn mc_kl_mixtures(p: &Mixture<f64>, q: &Mixture<f64>, n_samples: usize, rng: &mut Rng) -> Result<McKl> {
    if n_samples == 0 {
        return Err(Error::Contract("mc_kl needs at least one sample".into()));
    }
    let floor_ln = DENSITY_FLOOR.ln();
    let mut floored = 0;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let y = p.sample(rng);
        let mut lq = q.log_density(y);
        if lq < floor_ln {
            lq = floor_ln;
            floored += 1;
        }
        let term = p.log_density(y) - lq;
        sum += term;
        sum_sq += term * term;
    }
    let n = n_samples as f64;
    let value = sum / n;
    let var = (sum_sq / n - value * value).max(0.0);
    Ok(McKl { value, std_error: (var / n).sqrt(), floored })
}

/// `(1/(α−1)) ln ∫ p^α q^(1−α) dy` by trapezoid quadrature on `grid`.
pub fn renyi_divergence(p: &Mixture<f64>, q: &Mixture<f64>, alpha: f64, grid: &Grid) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Contract(format!("Rényi order must be positive, got {alpha}")));
    }
    if alpha == 1.0 {
        return Err(Error::Contract("Rényi order 1 is the KL divergence; use mc_kl".into()));
    }
    let integral = grid.integrate(|y| {
        let lp = p.log_density(y);
        let lq = q.log_density(y);
        if lp == f64::NEG_INFINITY {
            0.0
        } else {
            (alpha * lp + (1.0 - alpha) * lq).exp()
        }
    });
    Ok(integral.ln() / (alpha - 1.0))
}
