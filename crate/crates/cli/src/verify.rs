//! The `verify` subcommand: gradient checks, bound dominance and the
//! benchmark-table ordering, one line per check.

use std::fmt;

use rayon::prelude::*;

use probreg_core::autodiff::gradcheck::check;
use probreg_core::autodiff::{Rng, Tensor};
use probreg_core::bnn::{BnnModel, ElboWeights, Noise};
use probreg_core::data::Case;
use probreg_core::mdn::MdnModel;
use probreg_core::metrics::quadrature::{kl, Grid};
use probreg_core::metrics::{median, mixture_kl_upper_bound, run_experiment, ModelKind};
use probreg_core::mixture::Mixture;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const GRAD_TOL: f64 = 1e-4;
pub const GRAD_STEP: f64 = 1e-6;
pub const BOUND_SLACK: f64 = 1e-9;

/// Upper bounds on the median test NLL, and the BNN bimodal lower bound.
pub const MDN_MAGNITUDE: [(Case, f64); 3] = [(Case::CubicA, 0.3), (Case::BimodalC, 1.0), (Case::SinusoidalD, 0.3)];
pub const BNN_BIMODAL_FLOOR: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn gaussian_params(params: &[Tensor<f64>], rng: &mut Rng) -> Vec<Tensor<f64>> {
    params.iter().map(|p| rng.normal_tensor::<f64>(p.rows(), p.cols()).map(|v| 0.5 * v)).collect()
}

/// Worst relative error over `count` random parameterizations of the full
/// MDN loss, parameters drawn from `N(0, 0.5²)`.
pub fn mdn_gradient_error(seed: u64, count: usize) -> Result<f64, CliError> {
    let mut rng = Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let mut model = MdnModel::<f64>::init(8, 3, 1e-3, &mut rng)?;
        let params = gaussian_params(&model.parameters(), &mut rng);
        model.set_parameters(&params)?;
        let x = rng.uniform_tensor(4, 1, -3.0, 3.0);
        let y = rng.normal_tensor(4, 1);
        let (_, grads) = model.loss_and_grads(&x, &y)?;
        let mut probe = model.clone();
        let r = check(&params, &grads, GRAD_STEP, |p| {
            probe.set_parameters(p)?;
            probe.loss(&x, &y)
        })?;
        worst = worst.max(r.max_rel_err);
    }
    Ok(worst)
}

/// As [`mdn_gradient_error`] for the negative ELBO with its posterior draw
/// held fixed and the observation noise learned.
pub fn bnn_gradient_error(seed: u64, count: usize) -> Result<f64, CliError> {
    let mut rng = Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let mut model = BnnModel::<f64>::init(8, 0.05, 0.1, &mut rng)?;
        let params = gaussian_params(&model.parameters(true), &mut rng);
        model.set_parameters(&params)?;
        let noise = Noise::sample(&model, &mut rng);
        let x = rng.uniform_tensor(4, 1, -3.0, 3.0);
        let y = rng.normal_tensor(4, 1);
        let w = ElboWeights::with_kl(1.0 / 640.0);
        let (_, grads) = model.elbo_and_grads(&x, &y, &noise, w, true)?;
        let mut probe = model.clone();
        let r = check(&params, &grads, GRAD_STEP, |p| {
            probe.set_parameters(p)?;
            probe.elbo_value(&x, &y, &noise, w)
        })?;
        worst = worst.max(r.max_rel_err);
    }
    Ok(worst)
}

/// Mixture with `k` components, weights normalized from `[0.1, 0.9]`
/// draws and scales in `[0.05, 2]`.
pub fn random_mixture(rng: &mut Rng, k: usize) -> Mixture<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.uniform(0.1, 0.9)).collect();
    let total: f64 = raw.iter().sum();
    let means = (0..k).map(|_| rng.uniform(-3.0, 3.0)).collect();
    let stds = (0..k).map(|_| rng.uniform(0.05, 2.0)).collect();
    Mixture::new(raw.iter().map(|w| w / total).collect(), means, stds).expect("valid by construction")
}

/// Smallest `bound − KL` over `count` random matched pairs.
pub fn bound_margin(seed: u64, count: usize) -> Result<f64, CliError> {
    let mut rng = Rng::seed_from_u64(seed);
    let mut margin = f64::INFINITY;
    for _ in 0..count {
        let k = 1 + rng.below(5);
        let f = random_mixture(&mut rng, k);
        let g = random_mixture(&mut rng, k);
        let bound = mixture_kl_upper_bound(&f, &g)?;
        margin = margin.min(bound - kl(&f, &g, &Grid::covering(&[&f, &g])));
    }
    Ok(margin)
}

/// Runs every check; the benchmark runs always train both models.
pub fn verify(cfg: &ExperimentConfig) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let e = mdn_gradient_error(1, 20)?;
    checks.push(Check::new("gradient/mdn", e < GRAD_TOL, format!("max rel err {e:.3e} over 20 draws")));
    let e = bnn_gradient_error(2, 20)?;
    checks.push(Check::new("gradient/bnn", e < GRAD_TOL, format!("max rel err {e:.3e} over 20 draws")));
    let m = bound_margin(3, 100)?;
    checks.push(Check::new("bound/dominance", m >= -BOUND_SLACK, format!("min bound - KL {m:.3e} over 100 pairs")));

    let jobs: Vec<(Case, u64, ModelKind)> = cfg
        .cases
        .iter()
        .flat_map(|&c| cfg.seeds.iter().flat_map(move |&s| ModelKind::ALL.map(|m| (c, s, m))))
        .collect();
    let outcomes: Vec<_> = jobs
        .par_iter()
        .map(|&(c, s, m)| run_experiment(m, c, s, &cfg.protocol).map_err(|e| CliError::from_run(e, c, m, s)))
        .collect::<Result<_, _>>()?;
    let nll = |c: Case, s: u64, m: ModelKind| {
        let i = jobs.iter().position(|&j| j == (c, s, m)).expect("job exists");
        outcomes[i].test_nll
    };

    for (job, o) in jobs.iter().zip(&outcomes) {
        let (first, last) = (o.loss_trace.first(), o.loss_trace.last());
        let ok = matches!((first, last), (Some(a), Some(b)) if b < a);
        let detail = match (first, last) {
            (Some(a), Some(b)) => format!("loss {a:.4} -> {b:.4}"),
            _ => "no training epochs".to_string(),
        };
        checks.push(Check::new(format!("training/{}/{}/s{}", job.0, job.2, job.1), ok, detail));
    }
    for &c in &cfg.cases {
        for &s in &cfg.seeds {
            let (a, b) = (nll(c, s, ModelKind::Mdn), nll(c, s, ModelKind::Bnn));
            checks.push(Check::new(format!("ordering/{c}/s{s}"), a < b, format!("mdn {a:.4} < bnn {b:.4}")));
        }
    }
    if !cfg.quick {
        let med = |c: Case, m: ModelKind| median(&cfg.seeds.iter().map(|&s| nll(c, s, m)).collect::<Vec<_>>()).expect("seeds nonempty");
        for (c, limit) in MDN_MAGNITUDE {
            if cfg.cases.contains(&c) {
                let v = med(c, ModelKind::Mdn);
                checks.push(Check::new(format!("magnitude/{c}/mdn"), v <= limit, format!("median {v:.4} <= {limit}")));
            }
        }
        if cfg.cases.contains(&Case::BimodalC) {
            let v = med(Case::BimodalC, ModelKind::Bnn);
            checks.push(Check::new("magnitude/C/bnn", v >= BNN_BIMODAL_FLOOR, format!("median {v:.4} >= {BNN_BIMODAL_FLOOR}")));
        }
    }
    Ok(checks)
}
