//! Train one model on one synthetic case and score it on held-out data.

use std::fmt;
use std::str::FromStr;

use crate::autodiff::{Rng, Tensor};
use crate::bnn::{bnn_nll, mc_predict, train_bnn, BnnConfig, BnnModel};
use crate::data::{evaluation_grid, generate, split_indices, Case, Dataset, Split};
use crate::error::{Error, Result};
use crate::mdn::{train_mdn, MdnConfig, MdnModel};

/// Sub-stream tags for [`Rng::derive`].
pub mod stream {
    pub const DATA: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const TRAIN: u64 = 4;
    pub const EVAL: u64 = 5;
}

pub const DEFAULT_N: usize = 800;
pub const DEFAULT_MC_DRAWS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Mdn,
    Bnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Mdn, ModelKind::Bnn];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Mdn => "mdn",
            ModelKind::Bnn => "bnn",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mdn" => Ok(ModelKind::Mdn),
            "bnn" => Ok(ModelKind::Bnn),
            _ => Err(Error::Config(format!("unknown model '{s}' (expected mdn or bnn)"))),
        }
    }
}

/// Everything besides `(model, case, seed)` that determines a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    pub n: usize,
    pub mdn: MdnConfig,
    pub bnn: BnnConfig,
    /// Posterior draws for BNN test NLL and grid summaries.
    pub mc_draws: usize,
}

impl Default for Protocol {
    fn default() -> Self {
        Self { n: DEFAULT_N, mdn: MdnConfig::default(), bnn: BnnConfig::default(), mc_draws: DEFAULT_MC_DRAWS }
    }
}

impl Protocol {
    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.mdn.epochs = epochs;
        self.bnn.epochs = epochs;
        self
    }
}

#[derive(Debug, Clone)]
pub enum TrainedModel {
    Mdn(MdnModel<f64>),
    Bnn(BnnModel<f64>),
}

impl TrainedModel {
    pub fn to_json(&self) -> Result<String> {
        match self {
            TrainedModel::Mdn(m) => m.to_json(),
            TrainedModel::Bnn(m) => m.to_json(),
        }
    }
}

/// Predictive summary on the evaluation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPrediction {
    pub x: Vec<f64>,
    pub true_f: Vec<f64>,
    pub mean: Vec<f64>,
    pub std_epistemic: Vec<f64>,
    pub std_total: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub kind: ModelKind,
    pub case: Case,
    pub seed: u64,
    pub dataset: Dataset,
    pub split: Split,
    pub model: TrainedModel,
    pub loss_trace: Vec<f64>,
    pub test_nll: f64,
    pub grid: GridPrediction,
}

/// The dataset and split a run with `seed` uses.
pub fn prepare_data(case: Case, seed: u64, n: usize) -> Result<(Dataset, Split)> {
    let data = generate(case, n, Rng::derive(seed, stream::DATA).next_u64())?;
    let split = split_indices(data.len(), Rng::derive(seed, stream::SPLIT).next_u64())?;
    Ok((data, split))
}

fn column(values: &[f64]) -> Tensor<f64> {
    Tensor::column(values)
}

pub fn run_experiment(kind: ModelKind, case: Case, seed: u64, protocol: &Protocol) -> Result<RunOutcome> {
    let (dataset, split) = prepare_data(case, seed, protocol.n)?;
    let train = dataset.subset(&split.train);
    let test = dataset.subset(&split.test);
    let mut train_rng = Rng::derive(seed, stream::TRAIN);
    let mut eval_rng = Rng::derive(seed, stream::EVAL);
    let grid_x = evaluation_grid(case);
    let true_f: Vec<f64> = grid_x.iter().map(|&x| case.mean_function(x)).collect();
    let (x_test, y_test) = (column(&test.x), column(&test.y));
    let xg = column(&grid_x);

    let (model, loss_trace, test_nll, mean, std_epistemic, std_total) = match kind {
        ModelKind::Mdn => {
            let trained = train_mdn::<f64>(&train, &protocol.mdn, &mut train_rng)?;
            let nll = trained.model.forward(&x_test)?.nll(&y_test)?;
            let moments = trained.model.forward(&xg)?.predictive_mean_var()?;
            let mean = moments.iter().map(|m| m.0).collect();
            let total = moments.iter().map(|m| m.1.sqrt()).collect();
            (TrainedModel::Mdn(trained.model), trained.loss_trace, nll, mean, vec![0.0; grid_x.len()], total)
        }
        ModelKind::Bnn => {
            let trained = train_bnn::<f64>(&train, &protocol.bnn, &mut train_rng)?;
            let nll = bnn_nll(&trained.model, &x_test, &y_test, protocol.mc_draws, &mut eval_rng)?;
            let pred = mc_predict(&trained.model, &xg, protocol.mc_draws, &mut eval_rng)?;
            (TrainedModel::Bnn(trained.model), trained.loss_trace, nll, pred.mean, pred.std_epistemic, pred.std_total)
        }
    };
    Ok(RunOutcome {
        kind,
        case,
        seed,
        dataset,
        split,
        model,
        loss_trace,
        test_nll,
        grid: GridPrediction { x: grid_x, true_f, mean, std_epistemic, std_total },
    })
}

/// Per-sample test NLL of `kind` trained on `case` under `protocol`.
pub fn table1_nll(kind: ModelKind, case: Case, seed: u64, protocol: &Protocol) -> Result<f64> {
    run_experiment(kind, case, seed, protocol).map(|r| r.test_nll)
}

/// Median of a nonempty sample; the mean of the middle pair for even sizes.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_values() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0]), Some(2.5));
    }

    #[test]
    fn model_kind_parsing() {
        assert_eq!("MDN".parse::<ModelKind>().unwrap(), ModelKind::Mdn);
        assert!("gp".parse::<ModelKind>().is_err());
    }

    #[test]
    fn short_runs_are_deterministic() {
        let p = Protocol { n: 60, mc_draws: 10, ..Protocol::default() }.with_epochs(5);
        for kind in ModelKind::ALL {
            let a = run_experiment(kind, Case::CubicA, 7, &p).unwrap();
            let b = run_experiment(kind, Case::CubicA, 7, &p).unwrap();
            assert_eq!(a.test_nll.to_bits(), b.test_nll.to_bits());
            assert_eq!(a.grid, b.grid);
            assert_eq!(a.grid.x.len(), 500);
            assert_eq!(a.split.test.len(), 12);
        }
    }
}
