//! One-dimensional Gaussian mixtures: the conditional density at a single
//! input, whatever model produced it.

use serde::{Deserialize, Serialize};

use crate::autodiff::Rng;
use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, normal_log_pdf, Scalar};

/// `Σ_k w_k N(mean_k, sd_k²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Mixture<T> {
    weights: Vec<T>,
    means: Vec<T>,
    stds: Vec<T>,
}

impl<T: Scalar> Mixture<T> {
    /// Validates lengths, positive scales and weights that are nonnegative
    /// and sum to one (within `1e-9`).
    pub fn new(weights: Vec<T>, means: Vec<T>, stds: Vec<T>) -> Result<Self> {
        let k = weights.len();
        if k == 0 || means.len() != k || stds.len() != k {
            return Err(Error::dim(
                "Mixture::new",
                format!("{} weights, {} means, {} stds", k, means.len(), stds.len()),
            ));
        }
        if let Some(s) = stds.iter().find(|s| !(**s > T::zero()) || !s.is_finite()) {
            return Err(Error::domain("Mixture::new", format!("scale {s} must be positive and finite")));
        }
        if weights.iter().any(|w| *w < T::zero() || !w.is_finite()) {
            return Err(Error::domain("Mixture::new", "weights must be nonnegative"));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::domain("Mixture::new", format!("weights sum to {total}")));
        }
        Ok(Self { weights, means, stds })
    }

    pub fn gaussian(mean: T, sd: T) -> Result<Self> {
        Self::new(vec![T::one()], vec![mean], vec![sd])
    }

    /// Equal-weight mixture of `N(mean_t, sd²)`.
    pub fn uniform_over(means: Vec<T>, sd: T) -> Result<Self> {
        let k = means.len();
        let w = T::one() / T::lit(k as f64);
        Self::new(vec![w; k], means, vec![sd; k])
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn means(&self) -> &[T] {
        &self.means
    }

    pub fn stds(&self) -> &[T] {
        &self.stds
    }

    pub fn log_density(&self, y: T) -> T {
        let terms: Vec<T> = (0..self.k())
            .filter(|&i| self.weights[i] > T::zero())
            .map(|i| self.weights[i].ln() + normal_log_pdf(y, self.means[i], self.stds[i]))
            .collect();
        log_sum_exp(&terms)
    }

    pub fn density(&self, y: T) -> T {
        self.log_density(y).exp()
    }

    /// Exact mixture mean and variance:
    /// `m = Σ w_k μ_k`, `v = Σ w_k (σ_k² + μ_k²) − m²`, clipped at zero.
    pub fn mean_var(&self) -> (T, T) {
        let mut mean = T::zero();
        let mut second = T::zero();
        for i in 0..self.k() {
            let (w, m, s) = (self.weights[i], self.means[i], self.stds[i]);
            mean = mean + w * m;
            second = second + w * (s * s + m * m);
        }
        (mean, (second - mean * mean).max(T::zero()))
    }

    /// Component index drawn with probability equal to its weight.
    pub fn sample_component(&self, rng: &mut Rng) -> usize {
        let u = rng.uniform01();
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w.as_f64();
            if u < acc {
                return i;
            }
        }
        // u landed in the rounding slack above the last cumulative weight
        (0..self.k()).rev().find(|&i| self.weights[i] > T::zero()).unwrap_or(0)
    }

    pub fn sample(&self, rng: &mut Rng) -> T {
        let i = self.sample_component(rng);
        self.means[i] + self.stds[i] * T::lit(rng.normal())
    }

    pub fn sample_n(&self, rng: &mut Rng, n: usize) -> Vec<T> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    /// Interval `[min μ − width·max σ, max μ + width·max σ]` holding
    /// essentially all of the mass.
    pub fn support(&self, width: f64) -> (f64, f64) {
        let max_sd = self.stds.iter().map(|s| s.as_f64()).fold(0.0, f64::max);
        let lo = self.means.iter().map(|m| m.as_f64()).fold(f64::INFINITY, f64::min);
        let hi = self.means.iter().map(|m| m.as_f64()).fold(f64::NEG_INFINITY, f64::max);
        (lo - width * max_sd, hi + width * max_sd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(Mixture::new(vec![0.5f64, 0.4], vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(Mixture::new(vec![1.0f64], vec![0.0], vec![0.0]).is_err());
        assert!(Mixture::new(vec![1.0f64], vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Mixture::<f64>::new(vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn single_component_moments() {
        let m = Mixture::gaussian(2.5f64, 0.7).unwrap();
        let (mean, var) = m.mean_var();
        assert_eq!(mean, 2.5);
        assert!((var - 0.49).abs() < 1e-14);
    }

    #[test]
    fn symmetric_pair_moments() {
        let m = Mixture::new(vec![0.5f64, 0.5], vec![1.0, -1.0], vec![1e-9, 1e-9]).unwrap();
        let (mean, var) = m.mean_var();
        assert_eq!(mean, 0.0);
        assert!((var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_mass_component_always_chosen() {
        let m = Mixture::new(vec![1.0f64, 0.0, 0.0], vec![0.0, 5.0, -5.0], vec![1.0; 3]).unwrap();
        let mut rng = Rng::seed_from_u64(1);
        assert!((0..10_000).all(|_| m.sample_component(&mut rng) == 0));
    }
}
