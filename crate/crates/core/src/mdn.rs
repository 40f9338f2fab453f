//! Mixture density network: one tanh hidden layer feeding three affine
//! heads that parameterize a K-component Gaussian mixture per input.
//!
//! Mixture weights are the softmax of the first head, means are the second
//! head unchanged, and scales are `max(exp(raw), sigma_floor)` of the third.
//! Training minimizes the per-sample mean negative log-likelihood
//!
//! ```text
//! −(1/B) Σ_i log Σ_k π_k(x_i) N(y_i; μ_k(x_i), σ_k(x_i)²)
//! ```
//!
//! evaluated through a row-wise log-sum-exp of `log π_k + log N(·)`.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Adam, AdamConfig, Rng, Tape, Tensor, Var};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::init::{bias_uniform, fan_in_uniform};
use crate::mixture::Mixture;
use crate::scalar::{normal_log_pdf, Scalar, HALF_LN_2PI};

pub const DEFAULT_HIDDEN: usize = 50;
pub const DEFAULT_COMPONENTS: usize = 5;
pub const DEFAULT_SIGMA_FLOOR: f64 = 1e-3;

/// Number of parameter tensors, in [`MdnModel::parameters`] order.
const N_PARAMS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MdnModel<T> {
    pub hidden: usize,
    pub components: usize,
    pub sigma_floor: T,
    pub w_hidden: Tensor<T>,
    pub b_hidden: Tensor<T>,
    pub w_logit: Tensor<T>,
    pub b_logit: Tensor<T>,
    pub w_mean: Tensor<T>,
    pub b_mean: Tensor<T>,
    pub w_scale: Tensor<T>,
    pub b_scale: Tensor<T>,
}

/// Per-row mixture parameters, each tensor `B x K`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams<T> {
    pub pi: Tensor<T>,
    pub mu: Tensor<T>,
    pub sigma: Tensor<T>,
}

/// Head outputs recorded on a tape.
#[derive(Debug, Clone, Copy)]
pub struct HeadVars {
    pub logits: Var,
    pub mean: Var,
    pub raw_scale: Var,
}

impl<T: Scalar> MdnModel<T> {
    /// Weights and biases uniform on `±1/sqrt(fan_in)`.
    pub fn init(hidden: usize, components: usize, sigma_floor: T, rng: &mut Rng) -> Result<Self> {
        if hidden == 0 || components == 0 {
            return Err(Error::Config(format!("hidden={hidden}, components={components}; both must be ≥ 1")));
        }
        if !(sigma_floor > T::zero()) {
            return Err(Error::Config("sigma_floor must be positive".into()));
        }
        let w_hidden = fan_in_uniform(rng, 1, hidden);
        let b_hidden = bias_uniform(rng, 1, hidden);
        let mut head = || (fan_in_uniform(rng, hidden, components), bias_uniform(rng, hidden, components));
        let (w_logit, b_logit) = head();
        let (w_mean, b_mean) = head();
        let (w_scale, b_scale) = head();
        Ok(Self { hidden, components, sigma_floor, w_hidden, b_hidden, w_logit, b_logit, w_mean, b_mean, w_scale, b_scale })
    }

    /// Parameter tensors in a fixed order.
    pub fn parameters(&self) -> Vec<Tensor<T>> {
        vec![
            self.w_hidden.clone(),
            self.b_hidden.clone(),
            self.w_logit.clone(),
            self.b_logit.clone(),
            self.w_mean.clone(),
            self.b_mean.clone(),
            self.w_scale.clone(),
            self.b_scale.clone(),
        ]
    }

    pub fn set_parameters(&mut self, params: &[Tensor<T>]) -> Result<()> {
        if params.len() != N_PARAMS {
            return Err(Error::dim("MdnModel::set_parameters", format!("{} tensors", params.len())));
        }
        let slots = [
            &mut self.w_hidden,
            &mut self.b_hidden,
            &mut self.w_logit,
            &mut self.b_logit,
            &mut self.w_mean,
            &mut self.b_mean,
            &mut self.w_scale,
            &mut self.b_scale,
        ];
        for (slot, p) in slots.into_iter().zip(params) {
            slot.expect_same_shape(p, "MdnModel::set_parameters")?;
            *slot = p.clone();
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.parameters().iter().all(Tensor::is_finite)
    }

    /// Mixture parameters for each row of `x` (`B x 1`).
    pub fn forward(&self, x: &Tensor<T>) -> Result<MixtureParams<T>> {
        let h = Tensor::affine(x, &self.w_hidden, &self.b_hidden)?.map(T::tanh);
        let logits = Tensor::affine(&h, &self.w_logit, &self.b_logit)?;
        let mu = Tensor::affine(&h, &self.w_mean, &self.b_mean)?;
        let floor = self.sigma_floor;
        let sigma = Tensor::affine(&h, &self.w_scale, &self.b_scale)?.map(|r| r.exp().max(floor));
        let mut pi = logits.clone();
        for r in 0..logits.rows() {
            let row = logits.row(r);
            let max = row.iter().copied().fold(T::neg_infinity(), T::max);
            let total: T = row.iter().map(|&z| (z - max).exp()).sum();
            for c in 0..logits.cols() {
                pi.set(r, c, (logits.get(r, c) - max).exp() / total);
            }
        }
        Ok(MixtureParams { pi, mu, sigma })
    }

    /// Conditional mixture at a single input.
    pub fn mixture_at(&self, x: T) -> Result<Mixture<T>> {
        self.forward(&Tensor::scalar(x))?.row(0)
    }

    /// Records the network on `tape`; `params` are the leaves in
    /// [`MdnModel::parameters`] order.
    pub fn record(&self, tape: &mut Tape<T>, params: &[Var], x: Var) -> Result<HeadVars> {
        let [wh, bh, wl, bl, wm, bm, ws, bs] = params else {
            return Err(Error::dim("MdnModel::record", format!("{} parameter vars", params.len())));
        };
        let pre = tape.affine(x, *wh, *bh)?;
        let h = tape.tanh(pre);
        Ok(HeadVars {
            logits: tape.affine(h, *wl, *bl)?,
            mean: tape.affine(h, *wm, *bm)?,
            raw_scale: tape.affine(h, *ws, *bs)?,
        })
    }

    /// Mean NLL over the batch and its gradient for every parameter tensor.
    pub fn loss_and_grads(&self, x: &Tensor<T>, y: &Tensor<T>) -> Result<(T, Vec<Tensor<T>>)> {
        let mut tape = Tape::new();
        let params = self.parameters();
        let vars: Vec<Var> = params.iter().map(|p| tape.param(p.clone())).collect();
        let xv = tape.constant(x.clone());
        let heads = self.record(&mut tape, &vars, xv)?;
        let loss = nll_on_tape(&mut tape, heads, y, self.sigma_floor)?;
        let value = tape.value(loss).item()?;
        let grads = tape.backward(loss)?;
        let grads = vars.iter().zip(&params).map(|(v, p)| grads.get_or_zeros(*v, p)).collect();
        Ok((value, grads))
    }

    /// Mean NLL without recording gradients.
    pub fn loss(&self, x: &Tensor<T>, y: &Tensor<T>) -> Result<T> {
        self.forward(x)?.nll(y)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(s)?;
        let h = model.hidden;
        let k = model.components;
        let expected = [(1, h), (1, h), (h, k), (1, k), (h, k), (1, k), (h, k), (1, k)];
        for (p, shape) in model.parameters().iter().zip(expected) {
            if p.shape() != shape {
                return Err(Error::dim("MdnModel::from_json", format!("{:?} where {shape:?} expected", p.shape())));
            }
        }
        Ok(model)
    }
}

/// Mean mixture NLL recorded on a tape from raw head outputs.
///
/// Uses `log_softmax` for `log π` rather than the log of a softmax so that
/// tiny weights stay finite.
pub fn nll_on_tape<T: Scalar>(tape: &mut Tape<T>, heads: HeadVars, y: &Tensor<T>, sigma_floor: T) -> Result<Var> {
    let k = tape.value(heads.mean).cols();
    let log_pi = tape.log_softmax(heads.logits);
    let scale = tape.exp(heads.raw_scale);
    let sigma = tape.clamp_min(scale, sigma_floor);
    let log_sigma = tape.log(sigma)?;
    let target = tape.constant(y.tile_cols(k)?);
    let resid = tape.sub(target, heads.mean)?;
    let z = tape.div(resid, sigma)?;
    let z2 = tape.square(z);
    let half_z2 = tape.mul_scalar(z2, T::lit(0.5));
    let a = tape.sub(log_pi, log_sigma)?;
    let b = tape.sub(a, half_z2)?;
    let comp = tape.add_scalar(b, -T::lit(HALF_LN_2PI));
    let row_ll = tape.log_sum_exp(comp);
    let mean_ll = tape.mean(row_ll);
    Ok(tape.neg(mean_ll))
}

impl<T: Scalar> MixtureParams<T> {
    pub fn rows(&self) -> usize {
        self.pi.rows()
    }

    pub fn components(&self) -> usize {
        self.pi.cols()
    }

    pub fn row(&self, i: usize) -> Result<Mixture<T>> {
        Mixture::new(self.pi.row(i).to_vec(), self.mu.row(i).to_vec(), self.sigma.row(i).to_vec())
    }

    /// Per-sample mean NLL of the column `y`.
    pub fn nll(&self, y: &Tensor<T>) -> Result<T> {
        if y.shape() != (self.rows(), 1) {
            return Err(Error::dim("mdn_nll", format!("targets {:?} for {} rows", y.shape(), self.rows())));
        }
        let mut total = T::zero();
        let mut terms = vec![T::zero(); self.components()];
        for i in 0..self.rows() {
            let yi = y.get(i, 0);
            for (k, t) in terms.iter_mut().enumerate() {
                *t = self.pi.get(i, k).ln() + normal_log_pdf(yi, self.mu.get(i, k), self.sigma.get(i, k));
            }
            total = total - crate::scalar::log_sum_exp(&terms);
        }
        Ok(total / T::lit(self.rows() as f64))
    }

    /// Mixture mean and variance for each row.
    pub fn predictive_mean_var(&self) -> Result<Vec<(T, T)>> {
        (0..self.rows()).map(|i| Ok(self.row(i)?.mean_var())).collect()
    }
}

/// Training settings for [`train_mdn`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdnConfig {
    pub hidden: usize,
    pub components: usize,
    pub epochs: usize,
    pub lr: f64,
    pub sigma_floor: f64,
}

impl Default for MdnConfig {
    fn default() -> Self {
        Self {
            hidden: DEFAULT_HIDDEN,
            components: DEFAULT_COMPONENTS,
            epochs: 3000,
            lr: 1e-3,
            sigma_floor: DEFAULT_SIGMA_FLOOR,
        }
    }
}

/// A trained model and the full-batch loss recorded before each update.
#[derive(Debug, Clone)]
pub struct Trained<M, T> {
    pub model: M,
    pub loss_trace: Vec<T>,
}

pub(crate) fn columns<T: Scalar>(data: &Dataset) -> (Tensor<T>, Tensor<T>) {
    let x: Vec<T> = data.x.iter().map(|&v| T::lit(v)).collect();
    let y: Vec<T> = data.y.iter().map(|&v| T::lit(v)).collect();
    (Tensor::column(&x), Tensor::column(&y))
}

/// Full-batch Adam on the mean NLL. `rng` supplies the initialization.
pub fn train_mdn<T: Scalar>(data: &Dataset, config: &MdnConfig, rng: &mut Rng) -> Result<Trained<MdnModel<T>, T>> {
    if data.is_empty() {
        return Err(Error::Config("cannot train on an empty dataset".into()));
    }
    let mut model = MdnModel::init(config.hidden, config.components, T::lit(config.sigma_floor), rng)?;
    let (x, y) = columns::<T>(data);
    let mut params = model.parameters();
    let mut adam = Adam::new(AdamConfig::with_lr(T::lit(config.lr)), &params);
    let mut trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let (loss, grads) = model.loss_and_grads(&x, &y)?;
        if !loss.is_finite() || !grads.iter().all(Tensor::is_finite) {
            return Err(Error::Divergence { epoch, loss: loss.as_f64() });
        }
        trace.push(loss);
        adam.step(&mut params, &grads)?;
        model.set_parameters(&params)?;
    }
    Ok(Trained { model, loss_trace: trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate, Case};

    fn zero_heads(mut m: MdnModel<f64>) -> MdnModel<f64> {
        for t in [&mut m.w_logit, &mut m.b_logit, &mut m.w_mean, &mut m.b_mean, &mut m.w_scale, &mut m.b_scale] {
            *t = Tensor::zeros(t.rows(), t.cols());
        }
        m
    }

    #[test]
    fn zero_heads_give_uniform_unit_mixture() {
        let mut rng = Rng::seed_from_u64(0);
        let m = zero_heads(MdnModel::init(50, 5, 1e-3, &mut rng).unwrap());
        let p = m.forward(&Tensor::column(&[-2.0, 0.0, 1.7])).unwrap();
        for v in p.pi.data() {
            assert!((v - 0.2).abs() < 1e-15);
        }
        assert!(p.mu.data().iter().all(|&v| v == 0.0));
        assert!(p.sigma.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn weights_normalize() {
        let mut rng = Rng::seed_from_u64(1);
        let m = MdnModel::<f64>::init(50, 5, 1e-3, &mut rng).unwrap();
        let xs: Vec<f64> = rng.uniforms(-3.0, 3.0, 64);
        let p = m.forward(&Tensor::column(&xs)).unwrap();
        for i in 0..p.rows() {
            assert!((p.pi.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.pi.row(i).iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn single_component_at_its_mean() {
        let p = MixtureParams {
            pi: Tensor::ones(1, 1),
            mu: Tensor::scalar(0.4),
            sigma: Tensor::scalar(1.0),
        };
        let nll = p.nll(&Tensor::scalar(0.4)).unwrap();
        assert!((nll - HALF_LN_2PI).abs() < 1e-15);
        assert!((nll - 0.9189).abs() < 1e-4);
    }

    #[test]
    fn degenerate_two_component_matches_one() {
        let eps = 1e-14f64;
        let two = MixtureParams {
            pi: Tensor::from_vec(1, 2, vec![1.0 - eps, eps]).unwrap(),
            mu: Tensor::from_vec(1, 2, vec![0.3, -4.0]).unwrap(),
            sigma: Tensor::from_vec(1, 2, vec![0.8, 0.5]).unwrap(),
        };
        let one = MixtureParams { pi: Tensor::ones(1, 1), mu: Tensor::scalar(0.3), sigma: Tensor::scalar(0.8) };
        let y = Tensor::scalar(1.1);
        assert!((two.nll(&y).unwrap() - one.nll(&y).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn tape_and_plain_losses_agree() {
        let mut rng = Rng::seed_from_u64(2);
        let m = MdnModel::<f64>::init(8, 3, 1e-3, &mut rng).unwrap();
        let x = Tensor::column(&rng.uniforms(-3.0, 3.0, 10));
        let y = Tensor::column(&rng.normals(10));
        let (tape_loss, _) = m.loss_and_grads(&x, &y).unwrap();
        assert!((tape_loss - m.loss(&x, &y).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let data = generate(Case::CubicA, 40, 0).unwrap();
        let cfg = MdnConfig { epochs: 0, ..MdnConfig::default() };
        let trained = train_mdn::<f64>(&data, &cfg, &mut Rng::seed_from_u64(9)).unwrap();
        let init = MdnModel::<f64>::init(50, 5, 1e-3, &mut Rng::seed_from_u64(9)).unwrap();
        assert_eq!(trained.model, init);
        assert!(trained.loss_trace.is_empty());
    }

    #[test]
    fn training_is_deterministic_and_decreases_loss() {
        let data = generate(Case::SinusoidalD, 100, 4).unwrap();
        let cfg = MdnConfig { epochs: 200, hidden: 16, ..MdnConfig::default() };
        let a = train_mdn::<f64>(&data, &cfg, &mut Rng::seed_from_u64(1)).unwrap();
        let b = train_mdn::<f64>(&data, &cfg, &mut Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a.loss_trace, b.loss_trace);
        assert_eq!(a.model, b.model);
        assert!(a.loss_trace.last().unwrap() < &a.loss_trace[0]);
    }

    #[test]
    fn trains_in_single_precision() {
        let data = generate(Case::SinusoidalD, 100, 4).unwrap();
        let cfg = MdnConfig { epochs: 100, hidden: 16, ..MdnConfig::default() };
        let t = train_mdn::<f32>(&data, &cfg, &mut Rng::seed_from_u64(1)).unwrap();
        assert!(t.loss_trace.iter().all(|v| v.is_finite()));
        assert!(t.loss_trace.last().unwrap() < &t.loss_trace[0]);
    }

    #[test]
    fn json_roundtrip_is_bit_exact() {
        let m = MdnModel::<f64>::init(6, 3, 1e-3, &mut Rng::seed_from_u64(4)).unwrap();
        let back = MdnModel::<f64>::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let mut broken: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        broken["hidden"] = serde_json::json!(7);
        assert!(MdnModel::<f64>::from_json(&broken.to_string()).is_err());
    }

    #[test]
    fn rejects_degenerate_architecture() {
        assert!(MdnModel::<f64>::init(0, 5, 1e-3, &mut Rng::seed_from_u64(0)).is_err());
        assert!(MdnModel::<f64>::init(5, 0, 1e-3, &mut Rng::seed_from_u64(0)).is_err());
    }
}
