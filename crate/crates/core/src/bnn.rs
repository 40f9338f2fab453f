//! Variational Bayesian neural network with a factorized Gaussian posterior
//! over every weight and bias of a `1 → H → 1` network.
//!
//! Each coordinate has posterior `N(μ, softplus(ρ)²)` and prior `N(0, 1)`.
//! A forward pass draws `w = μ + softplus(ρ)·ε` with `ε ~ N(0, 1)`, so the
//! gradient reaches `μ` and `ρ` through the draw. The likelihood is
//! `N(y; f_w(x), σ_obs²)` with a single `σ_obs = exp(log_sigma_obs)`.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Adam, AdamConfig, Rng, Tape, Tensor, Var};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::init::{bias_uniform, fan_in_uniform};
use crate::mdn::columns;
use crate::mixture::Mixture;
use crate::scalar::{log_sum_exp, normal_log_pdf, Scalar, HALF_LN_2PI};

pub const DEFAULT_HIDDEN: usize = 50;
/// Initial posterior standard deviation of every coordinate.
pub const DEFAULT_POSTERIOR_STD: f64 = 0.05;
/// Initial observation noise; the data noise scale.
pub const DEFAULT_SIGMA_OBS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Activation {
    #[default]
    Tanh,
    /// Linear network, used where closed-form moments are needed.
    Identity,
}

impl Activation {
    fn apply<T: Scalar>(self, v: T) -> T {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }
}

/// Gaussian posterior over one affine layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct VariationalLayer<T> {
    pub weight_mu: Tensor<T>,
    pub weight_rho: Tensor<T>,
    pub bias_mu: Tensor<T>,
    pub bias_rho: Tensor<T>,
}

/// `ρ` with `softplus(ρ) = std`.
pub fn rho_for_std(std: f64) -> f64 {
    // ln(e^s − 1), written to stay accurate for small s
    std + (-(-std).exp_m1()).ln()
}

impl<T: Scalar> VariationalLayer<T> {
    /// Weight and bias means uniform on `±1/sqrt(fan_in)`,
    /// every posterior std equal to `posterior_std`.
    pub fn init(fan_in: usize, fan_out: usize, posterior_std: f64, rng: &mut Rng) -> Self {
        let rho = T::lit(rho_for_std(posterior_std));
        Self {
            weight_mu: fan_in_uniform(rng, fan_in, fan_out),
            weight_rho: Tensor::full(fan_in, fan_out, rho),
            bias_mu: bias_uniform(rng, fan_in, fan_out),
            bias_rho: Tensor::full(1, fan_out, rho),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weight_mu.rows()
    }

    pub fn fan_out(&self) -> usize {
        self.weight_mu.cols()
    }

    /// `Σ KL(N(μ, s²) ‖ N(0, 1))` over the layer's coordinates.
    pub fn kl_to_prior(&self) -> T {
        let pairs = [(&self.weight_mu, &self.weight_rho), (&self.bias_mu, &self.bias_rho)];
        pairs
            .iter()
            .flat_map(|(mu, rho)| mu.data().iter().zip(rho.data()))
            .map(|(&m, &r)| gaussian_kl_to_standard(m, r.softplus()))
            .sum()
    }

    fn sample(&self, noise: &LayerNoise<T>) -> (Tensor<T>, Tensor<T>) {
        let draw = |mu: &Tensor<T>, rho: &Tensor<T>, eps: &Tensor<T>| {
            Tensor::from_fn(mu.rows(), mu.cols(), |r, c| mu.get(r, c) + rho.get(r, c).softplus() * eps.get(r, c))
        };
        (draw(&self.weight_mu, &self.weight_rho, &noise.weight), draw(&self.bias_mu, &self.bias_rho, &noise.bias))
    }
}

/// `KL(N(μ, s²) ‖ N(0, 1)) = −ln s + (s² + μ²)/2 − 1/2`.
pub fn gaussian_kl_to_standard<T: Scalar>(mu: T, s: T) -> T {
    let half = T::lit(0.5);
    -s.ln() + half * (s * s + mu * mu) - half
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNoise<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

/// Standard-normal draws for every posterior coordinate; fixing these makes
/// a forward pass deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Noise<T> {
    pub layer1: LayerNoise<T>,
    pub layer2: LayerNoise<T>,
}

impl<T: Scalar> Noise<T> {
    pub fn sample(model: &BnnModel<T>, rng: &mut Rng) -> Self {
        let mut layer = |l: &VariationalLayer<T>| LayerNoise {
            weight: rng.normal_tensor(l.fan_in(), l.fan_out()),
            bias: rng.normal_tensor(1, l.fan_out()),
        };
        Self { layer1: layer(&model.layer1), layer2: layer(&model.layer2) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BnnModel<T> {
    pub hidden: usize,
    #[serde(default)]
    pub activation: Activation,
    pub layer1: VariationalLayer<T>,
    pub layer2: VariationalLayer<T>,
    pub log_sigma_obs: T,
}

/// Relative weights of the two ELBO terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElboWeights<T> {
    pub likelihood: T,
    pub kl: T,
}

impl<T: Scalar> ElboWeights<T> {
    pub fn with_kl(kl: T) -> Self {
        Self { likelihood: T::one(), kl }
    }
}

const LAYER_PARAMS: usize = 8;

impl<T: Scalar> BnnModel<T> {
    pub fn init(hidden: usize, posterior_std: f64, sigma_obs: f64, rng: &mut Rng) -> Result<Self> {
        if hidden == 0 {
            return Err(Error::Config("hidden width must be ≥ 1".into()));
        }
        if !(posterior_std > 0.0) || !(sigma_obs > 0.0) {
            return Err(Error::Config("posterior std and observation noise must be positive".into()));
        }
        let layer1 = VariationalLayer::init(1, hidden, posterior_std, rng);
        let layer2 = VariationalLayer::init(hidden, 1, posterior_std, rng);
        Ok(Self { hidden, activation: Activation::Tanh, layer1, layer2, log_sigma_obs: T::lit(sigma_obs.ln()) })
    }

    pub fn sigma_obs(&self) -> T {
        self.log_sigma_obs.exp()
    }

    /// Posterior tensors `[w1_μ, w1_ρ, b1_μ, b1_ρ, w2_μ, w2_ρ, b2_μ, b2_ρ]`,
    /// followed by `log_sigma_obs` as a 1x1 tensor when `with_noise`.
    pub fn parameters(&self, with_noise: bool) -> Vec<Tensor<T>> {
        let mut out = Vec::with_capacity(LAYER_PARAMS + 1);
        for l in [&self.layer1, &self.layer2] {
            out.extend([l.weight_mu.clone(), l.weight_rho.clone(), l.bias_mu.clone(), l.bias_rho.clone()]);
        }
        if with_noise {
            out.push(Tensor::scalar(self.log_sigma_obs));
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[Tensor<T>]) -> Result<()> {
        if params.len() != LAYER_PARAMS && params.len() != LAYER_PARAMS + 1 {
            return Err(Error::dim("BnnModel::set_parameters", format!("{} tensors", params.len())));
        }
        let slots = [
            &mut self.layer1.weight_mu,
            &mut self.layer1.weight_rho,
            &mut self.layer1.bias_mu,
            &mut self.layer1.bias_rho,
            &mut self.layer2.weight_mu,
            &mut self.layer2.weight_rho,
            &mut self.layer2.bias_mu,
            &mut self.layer2.bias_rho,
        ];
        for (slot, p) in slots.into_iter().zip(params) {
            slot.expect_same_shape(p, "BnnModel::set_parameters")?;
            *slot = p.clone();
        }
        if let Some(ls) = params.get(LAYER_PARAMS) {
            self.log_sigma_obs = ls.item()?;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.parameters(true).iter().all(Tensor::is_finite)
    }

    /// `Σ KL(q ‖ p)` over all weights and biases.
    pub fn kl_to_prior(&self) -> T {
        self.layer1.kl_to_prior() + self.layer2.kl_to_prior()
    }

    /// Network output under the weights selected by `noise`.
    pub fn forward_with(&self, noise: &Noise<T>, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (w1, b1) = self.layer1.sample(&noise.layer1);
        let (w2, b2) = self.layer2.sample(&noise.layer2);
        let act = self.activation;
        let h = Tensor::affine(x, &w1, &b1)?.map(|v| act.apply(v));
        Tensor::affine(&h, &w2, &b2)
    }

    /// Network output at the posterior means.
    pub fn forward_mean(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let act = self.activation;
        let h = Tensor::affine(x, &self.layer1.weight_mu, &self.layer1.bias_mu)?.map(|v| act.apply(v));
        Tensor::affine(&h, &self.layer2.weight_mu, &self.layer2.bias_mu)
    }

    /// One posterior draw, then a deterministic pass.
    pub fn sample_forward(&self, x: &Tensor<T>, rng: &mut Rng) -> Result<Tensor<T>> {
        let noise = Noise::sample(self, rng);
        self.forward_with(&noise, x)
    }

    /// Records one reparameterized pass. `params` come from
    /// [`BnnModel::parameters`]; a missing ninth entry means the
    /// observation noise is held fixed.
    pub fn record(&self, tape: &mut Tape<T>, params: &[Var], noise: &Noise<T>, x: Var) -> Result<Recorded> {
        if params.len() < LAYER_PARAMS {
            return Err(Error::dim("BnnModel::record", format!("{} parameter vars", params.len())));
        }
        let mut stds = Vec::with_capacity(4);
        let mut draw = |tape: &mut Tape<T>, mu: Var, rho: Var, eps: &Tensor<T>| -> Result<Var> {
            let s = tape.softplus(rho);
            stds.push((mu, s));
            let e = tape.constant(eps.clone());
            let scaled = tape.mul(s, e)?;
            tape.add(mu, scaled)
        };
        let w1 = draw(tape, params[0], params[1], &noise.layer1.weight)?;
        let b1 = draw(tape, params[2], params[3], &noise.layer1.bias)?;
        let w2 = draw(tape, params[4], params[5], &noise.layer2.weight)?;
        let b2 = draw(tape, params[6], params[7], &noise.layer2.bias)?;
        let pre = tape.affine(x, w1, b1)?;
        let h = match self.activation {
            Activation::Tanh => tape.tanh(pre),
            Activation::Identity => pre,
        };
        let output = tape.affine(h, w2, b2)?;
        Ok(Recorded { output, posterior: stds })
    }

    /// `Σ −ln s + (s² + μ²)/2 − 1/2` over recorded `(μ, s)` pairs.
    pub fn record_kl(tape: &mut Tape<T>, posterior: &[(Var, Var)]) -> Result<Var> {
        let mut total: Option<Var> = None;
        for &(mu, s) in posterior {
            let log_s = tape.log(s)?;
            let s2 = tape.square(s);
            let m2 = tape.square(mu);
            let quad = tape.add(s2, m2)?;
            let half_quad = tape.mul_scalar(quad, T::lit(0.5));
            let diff = tape.sub(half_quad, log_s)?;
            let shifted = tape.add_scalar(diff, -T::lit(0.5));
            let part = tape.sum(shifted);
            total = Some(match total {
                Some(t) => tape.add(t, part)?,
                None => part,
            });
        }
        total.ok_or_else(|| Error::Contract("no posterior coordinates recorded".into()))
    }

    /// Records the negative ELBO estimate for a fixed noise draw:
    /// `w_lik · (−(1/B) Σ ln N(y_i; f(x_i), σ_obs²)) + w_kl · KL(q ‖ p)`.
    pub fn record_elbo(
        &self,
        tape: &mut Tape<T>,
        params: &[Var],
        noise: &Noise<T>,
        x: &Tensor<T>,
        y: &Tensor<T>,
        weights: ElboWeights<T>,
    ) -> Result<Var> {
        if x.rows() == 0 {
            return Err(Error::Contract("ELBO needs a nonempty batch".into()));
        }
        let xv = tape.constant(x.clone());
        let rec = self.record(tape, params, noise, xv)?;
        let target = tape.constant(y.clone());
        let resid = tape.sub(target, rec.output)?;
        let sq = tape.square(resid);
        let mse = tape.mean(sq);
        let log_sigma = match params.get(LAYER_PARAMS) {
            Some(v) => *v,
            None => tape.constant(Tensor::scalar(self.log_sigma_obs)),
        };
        // 0.5 ln 2π + ln σ + 0.5 · mse · exp(−2 ln σ)
        let m2 = tape.mul_scalar(log_sigma, -T::lit(2.0));
        let inv_var = tape.exp(m2);
        let scaled = tape.mul(mse, inv_var)?;
        let half = tape.mul_scalar(scaled, T::lit(0.5));
        let with_log = tape.add(half, log_sigma)?;
        let nll = tape.add_scalar(with_log, T::lit(HALF_LN_2PI));
        let kl = Self::record_kl(tape, &rec.posterior)?;
        let lik_term = tape.mul_scalar(nll, weights.likelihood);
        let kl_term = tape.mul_scalar(kl, weights.kl);
        tape.add(lik_term, kl_term)
    }

    /// Negative ELBO for a fixed noise draw and its gradient with respect to
    /// [`BnnModel::parameters`]`(learn_noise)`.
    pub fn elbo_and_grads(
        &self,
        x: &Tensor<T>,
        y: &Tensor<T>,
        noise: &Noise<T>,
        weights: ElboWeights<T>,
        learn_noise: bool,
    ) -> Result<(T, Vec<Tensor<T>>)> {
        let mut tape = Tape::new();
        let params = self.parameters(learn_noise);
        let vars: Vec<Var> = params.iter().map(|p| tape.param(p.clone())).collect();
        let loss = self.record_elbo(&mut tape, &vars, noise, x, y, weights)?;
        let value = tape.value(loss).item()?;
        let grads = tape.backward(loss)?;
        let grads = vars.iter().zip(&params).map(|(v, p)| grads.get_or_zeros(*v, p)).collect();
        Ok((value, grads))
    }

    /// The same objective evaluated without a tape.
    pub fn elbo_value(&self, x: &Tensor<T>, y: &Tensor<T>, noise: &Noise<T>, weights: ElboWeights<T>) -> Result<T> {
        if x.rows() == 0 {
            return Err(Error::Contract("ELBO needs a nonempty batch".into()));
        }
        let f = self.forward_with(noise, x)?;
        let sigma = self.sigma_obs();
        let n = T::lit(x.rows() as f64);
        let nll = -(0..x.rows()).map(|i| normal_log_pdf(y.get(i, 0), f.get(i, 0), sigma)).sum::<T>() / n;
        Ok(weights.likelihood * nll + weights.kl * self.kl_to_prior())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(s)?;
        let h = model.hidden;
        let expected = [(1, h), (1, h), (1, h), (1, h), (h, 1), (h, 1), (1, 1), (1, 1)];
        for (p, shape) in model.parameters(false).iter().zip(expected) {
            if p.shape() != shape {
                return Err(Error::dim("BnnModel::from_json", format!("{:?} where {shape:?} expected", p.shape())));
            }
        }
        Ok(model)
    }
}

/// Output of [`BnnModel::record`].
#[derive(Debug, Clone)]
pub struct Recorded {
    pub output: Var,
    /// `(μ, s)` variable pairs for every posterior tensor.
    pub posterior: Vec<(Var, Var)>,
}

/// Monte Carlo predictive summary on a set of inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct McPrediction<T> {
    pub mean: Vec<T>,
    /// Spread of the sampled network outputs.
    pub std_epistemic: Vec<T>,
    /// `sqrt(std_epistemic² + σ_obs²)`.
    pub std_total: Vec<T>,
}

/// Mean and population std across draws; `draws[t]` is one `G x 1` pass.
pub fn summarize_draws<T: Scalar>(draws: &[Tensor<T>], sigma_obs: T) -> Result<McPrediction<T>> {
    if draws.len() < 2 {
        return Err(Error::Contract(format!("need at least 2 draws, got {}", draws.len())));
    }
    let g = draws[0].rows();
    let count = T::lit(draws.len() as f64);
    let mut mean = Vec::with_capacity(g);
    let mut std_epistemic = Vec::with_capacity(g);
    let mut std_total = Vec::with_capacity(g);
    for i in 0..g {
        // summed in draw order for a reproducible result
        let m = draws.iter().map(|d| d.get(i, 0)).sum::<T>() / count;
        let v = draws.iter().map(|d| (d.get(i, 0) - m).powi(2)).sum::<T>() / count;
        mean.push(m);
        std_epistemic.push(v.sqrt());
        std_total.push((v + sigma_obs * sigma_obs).sqrt());
    }
    Ok(McPrediction { mean, std_epistemic, std_total })
}

/// `T` posterior passes over `x` (`G x 1`), summarized per point.
pub fn mc_predict<T: Scalar>(model: &BnnModel<T>, x: &Tensor<T>, draws: usize, rng: &mut Rng) -> Result<McPrediction<T>> {
    if draws < 2 {
        return Err(Error::Contract(format!("mc_predict needs T ≥ 2, got {draws}")));
    }
    let outputs = (0..draws).map(|_| model.sample_forward(x, rng)).collect::<Result<Vec<_>>>()?;
    summarize_draws(&outputs, model.sigma_obs())
}

/// Per-sample NLL of the Monte Carlo predictive
/// `(1/T) Σ_t N(y; f_t(x), σ_obs²)`, averaged over the points.
pub fn bnn_nll<T: Scalar>(model: &BnnModel<T>, x: &Tensor<T>, y: &Tensor<T>, draws: usize, rng: &mut Rng) -> Result<T> {
    if draws == 0 {
        return Err(Error::Contract("bnn_nll needs T ≥ 1".into()));
    }
    if x.rows() == 0 || y.shape() != x.shape() {
        return Err(Error::dim("bnn_nll", format!("x {:?}, y {:?}", x.shape(), y.shape())));
    }
    let outputs = (0..draws).map(|_| model.sample_forward(x, rng)).collect::<Result<Vec<_>>>()?;
    let sigma = model.sigma_obs();
    let ln_t = T::lit(draws as f64).ln();
    let mut terms = vec![T::zero(); draws];
    let mut total = T::zero();
    for i in 0..x.rows() {
        for (t, out) in terms.iter_mut().zip(&outputs) {
            *t = normal_log_pdf(y.get(i, 0), out.get(i, 0), sigma);
        }
        total = total - (log_sum_exp(&terms) - ln_t);
    }
    Ok(total / T::lit(x.rows() as f64))
}

/// Train-set average of `E_{w~q}[−ln N(y; f_w(x), σ_obs²)]` over `draws`
/// posterior samples.
pub fn expected_nll<T: Scalar>(model: &BnnModel<T>, x: &Tensor<T>, y: &Tensor<T>, draws: usize, rng: &mut Rng) -> Result<T> {
    if draws == 0 || x.rows() == 0 {
        return Err(Error::Contract("expected_nll needs draws ≥ 1 and a nonempty set".into()));
    }
    let sigma = model.sigma_obs();
    let mut total = T::zero();
    for _ in 0..draws {
        let f = model.sample_forward(x, rng)?;
        total = total - (0..x.rows()).map(|i| normal_log_pdf(y.get(i, 0), f.get(i, 0), sigma)).sum::<T>();
    }
    Ok(total / T::lit((draws * x.rows()) as f64))
}

/// A fixed set of posterior draws: the predictive at any `x` is the
/// equal-weight mixture of `N(f_t(x), σ_obs²)`.
#[derive(Debug, Clone)]
pub struct FrozenPredictive<T> {
    model: BnnModel<T>,
    noises: Vec<Noise<T>>,
}

impl<T: Scalar> FrozenPredictive<T> {
    pub fn new(model: &BnnModel<T>, draws: usize, rng: &mut Rng) -> Result<Self> {
        if draws == 0 {
            return Err(Error::Contract("frozen predictive needs at least one draw".into()));
        }
        let noises = (0..draws).map(|_| Noise::sample(model, rng)).collect();
        Ok(Self { model: model.clone(), noises })
    }

    pub fn draws(&self) -> usize {
        self.noises.len()
    }

    pub fn mixture_at(&self, x: T) -> Result<Mixture<T>> {
        let xs = Tensor::scalar(x);
        let means = self
            .noises
            .iter()
            .map(|n| self.model.forward_with(n, &xs).map(|f| f.get(0, 0)))
            .collect::<Result<Vec<_>>>()?;
        Mixture::uniform_over(means, self.model.sigma_obs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KlWeight {
    /// `1 / n_train`.
    PerTrainPoint,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObsNoise {
    /// `log_sigma_obs` trained alongside the posterior, starting at ln 0.1.
    Learned,
    Frozen(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnnConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub lr: f64,
    pub kl_weight: KlWeight,
    pub obs_noise: ObsNoise,
    pub posterior_std: f64,
    pub activation: Activation,
}

impl Default for BnnConfig {
    fn default() -> Self {
        Self {
            hidden: DEFAULT_HIDDEN,
            epochs: 3000,
            lr: 1e-3,
            kl_weight: KlWeight::PerTrainPoint,
            obs_noise: ObsNoise::Learned,
            posterior_std: DEFAULT_POSTERIOR_STD,
            activation: Activation::Tanh,
        }
    }
}

/// Trained BNN with the per-epoch loss and the mean squared residual of the
/// sampled network, both recorded before each update.
#[derive(Debug, Clone)]
pub struct BnnTraining<T> {
    pub model: BnnModel<T>,
    pub loss_trace: Vec<T>,
    pub mse_trace: Vec<T>,
}

/// Full-batch Adam on the negative ELBO with a fresh posterior draw each
/// epoch. `rng` supplies the initialization and then the draws.
pub fn train_bnn<T: Scalar>(data: &Dataset, config: &BnnConfig, rng: &mut Rng) -> Result<BnnTraining<T>> {
    if data.is_empty() {
        return Err(Error::Config("cannot train on an empty dataset".into()));
    }
    let (learn_noise, sigma0) = match config.obs_noise {
        ObsNoise::Learned => (true, DEFAULT_SIGMA_OBS),
        ObsNoise::Frozen(s) => (false, s),
    };
    let kl = match config.kl_weight {
        KlWeight::PerTrainPoint => 1.0 / data.len() as f64,
        KlWeight::Fixed(w) if w >= 0.0 => w,
        KlWeight::Fixed(w) => return Err(Error::Config(format!("kl weight {w} is negative"))),
    };
    let weights = ElboWeights::with_kl(T::lit(kl));
    let mut model = BnnModel::init(config.hidden, config.posterior_std, sigma0, rng)?;
    model.activation = config.activation;
    let (x, y) = columns::<T>(data);
    let mut params = model.parameters(learn_noise);
    let mut adam = Adam::new(AdamConfig::with_lr(T::lit(config.lr)), &params);
    let mut loss_trace = Vec::with_capacity(config.epochs);
    let mut mse_trace = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let noise = Noise::sample(&model, rng);
        let (loss, grads) = model.elbo_and_grads(&x, &y, &noise, weights, learn_noise)?;
        if !loss.is_finite() || !grads.iter().all(Tensor::is_finite) {
            return Err(Error::Divergence { epoch, loss: loss.as_f64() });
        }
        let f = model.forward_with(&noise, &x)?;
        let mse = f.data().iter().zip(y.data()).map(|(a, b)| (*a - *b).powi(2)).sum::<T>() / T::lit(x.rows() as f64);
        loss_trace.push(loss);
        mse_trace.push(mse);
        adam.step(&mut params, &grads)?;
        model.set_parameters(&params)?;
    }
    Ok(BnnTraining { model, loss_trace, mse_trace })
}
