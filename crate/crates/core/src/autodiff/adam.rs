use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::tensor::Tensor;

/// Adam hyperparameters. Defaults: lr 1e-3, betas (0.9, 0.999), eps 1e-8.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig<T> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
}

impl<T: Scalar> Default for AdamConfig<T> {
    fn default() -> Self {
        Self { lr: T::lit(1e-3), beta1: T::lit(0.9), beta2: T::lit(0.999), eps: T::lit(1e-8) }
    }
}

impl<T: Scalar> AdamConfig<T> {
    pub fn with_lr(lr: T) -> Self {
        Self { lr, ..Self::default() }
    }
}

/// Moment accumulators for one ordered list of parameter tensors.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    config: AdamConfig<T>,
    first: Vec<Tensor<T>>,
    second: Vec<Tensor<T>>,
    step: u64,
}

impl<T: Scalar> Adam<T> {
    /// Zeroed moments shaped like `params`.
    pub fn new(config: AdamConfig<T>, params: &[Tensor<T>]) -> Self {
        let zeros = || params.iter().map(|p| Tensor::zeros(p.rows(), p.cols())).collect();
        Self { config, first: zeros(), second: zeros(), step: 0 }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn config(&self) -> &AdamConfig<T> {
        &self.config
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut [Tensor<T>], grads: &[Tensor<T>]) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != params.len() {
            return Err(Error::dim(
                "adam_step",
                format!("{} params, {} grads, {} moment slots", params.len(), grads.len(), self.first.len()),
            ));
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.first) {
            p.expect_same_shape(g, "adam_step")?;
            p.expect_same_shape(m, "adam_step")?;
        }

        self.step += 1;
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        let one = T::one();
        let t = self.step as i32;
        let correct1 = one - beta1.powi(t);
        let correct2 = one - beta2.powi(t);

        for ((p, g), (m, v)) in params.iter_mut().zip(grads).zip(self.first.iter_mut().zip(self.second.iter_mut())) {
            let pd = p.data_mut();
            let md = m.data_mut();
            let vd = v.data_mut();
            for i in 0..pd.len() {
                let gi = g.data()[i];
                md[i] = beta1 * md[i] + (one - beta1) * gi;
                vd[i] = beta2 * vd[i] + (one - beta2) * gi * gi;
                let m_hat = md[i] / correct1;
                let v_hat = vd[i] / correct2;
                pd[i] = pd[i] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut params = vec![Tensor::from_vec(1, 3, vec![0.5f64, -1.0, 2.0]).unwrap()];
        let before = params.clone();
        let mut adam = Adam::new(AdamConfig::default(), &params);
        for _ in 0..5 {
            adam.step(&mut params, &[Tensor::zeros(1, 3)]).unwrap();
        }
        assert_eq!(params, before);
        assert_eq!(adam.step_count(), 5);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // m̂ = g, v̂ = g², so the step is lr·g/(|g| + eps)
        let g = 0.37f64;
        let mut params = vec![Tensor::scalar(1.0f64)];
        let mut adam = Adam::new(AdamConfig::default(), &params);
        adam.step(&mut params, &[Tensor::scalar(g)]).unwrap();
        let expected = 1.0 - 1e-3 * g / (g + 1e-8);
        assert!((params[0].item().unwrap() - expected).abs() < 1e-15);
        assert!(((1.0 - params[0].item().unwrap()) - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn shape_mismatch_is_error() {
        let mut params = vec![Tensor::<f64>::zeros(2, 2)];
        let mut adam = Adam::new(AdamConfig::default(), &params);
        assert!(adam.step(&mut params, &[Tensor::zeros(1, 2)]).is_err());
        assert!(adam.step(&mut params, &[]).is_err());
    }
}
