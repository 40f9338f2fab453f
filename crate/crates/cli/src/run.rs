//! The `run` and `export-dataset` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use probreg_core::autodiff::Rng;
use probreg_core::bnn::expected_nll;
use probreg_core::data::{Case, Dataset, Split};
use probreg_core::metrics::table1::{prepare_data, GridPrediction};
use probreg_core::metrics::{median, run_experiment, ModelKind, PacBayesInputs, RunOutcome, TrainedModel};
use probreg_core::Tensor64;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::svg;

/// Confidence level for the reported PAC-Bayes certificate.
pub const PAC_DELTA: f64 = 0.05;
const PAC_STREAM: u64 = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub case: Case,
    pub model: ModelKind,
    pub seed: u64,
    pub test_nll: f64,
    /// `(metric, value)` rows in emission order.
    pub metrics: Vec<(String, f64)>,
}

pub fn dataset_path(out: &Path, case: Case, seed: u64) -> PathBuf {
    out.join(format!("data_{case}_s{seed}.csv"))
}

pub fn run_prefix(out: &Path, case: Case, model: ModelKind, seed: u64) -> PathBuf {
    out.join(format!("{case}_{model}_s{seed}"))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let map = |e: csv::Error| CliError::Core(e.into());
    w.write_record(header).map_err(map)?;
    for r in rows {
        w.write_record(&r).map_err(map)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Core(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn dataset_csv(data: &Dataset, split: &Split) -> Result<String, CliError> {
    let mut buf = Vec::new();
    data.write_csv(split, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn grid_csv(g: &GridPrediction) -> Result<String, CliError> {
    let rows = (0..g.x.len()).map(|i| {
        [g.x[i], g.true_f[i], g.mean[i], g.std_epistemic[i], g.std_total[i]].iter().map(f64::to_string).collect()
    });
    csv_text(&["x", "true_f", "mean", "std_epistemic", "std_total"], rows)
}

fn loss_csv(trace: &[f64]) -> Result<String, CliError> {
    csv_text(&["epoch", "loss"], trace.iter().enumerate().map(|(e, l)| vec![e.to_string(), l.to_string()]))
}

pub fn metrics_csv(records: &[RunRecord]) -> Result<String, CliError> {
    let rows = records.iter().flat_map(|r| {
        r.metrics.iter().map(move |(name, v)| vec![r.case.to_string(), r.model.to_string(), r.seed.to_string(), name.clone(), v.to_string()])
    });
    csv_text(&["case", "model", "seed", "metric", "value"], rows)
}

/// Rows of cases by seed, one column per model, then a median row per case
/// when several seeds ran.
pub fn summary_csv(records: &[RunRecord], cases: &[Case], models: &[ModelKind], seeds: &[u64]) -> Result<String, CliError> {
    let lookup = |c: Case, m: ModelKind, s: u64| records.iter().find(|r| r.case == c && r.model == m && r.seed == s).map(|r| r.test_nll);
    let mut header = vec!["case".to_string(), "seed".to_string()];
    header.extend(models.iter().map(|m| format!("{m}_nll")));
    let mut rows = Vec::new();
    for &c in cases {
        for &s in seeds {
            let mut row = vec![c.to_string(), s.to_string()];
            row.extend(models.iter().map(|&m| lookup(c, m, s).map(|v| v.to_string()).unwrap_or_default()));
            rows.push(row);
        }
        if seeds.len() > 1 {
            let mut row = vec![c.to_string(), "median".to_string()];
            for &m in models {
                let vals: Vec<f64> = seeds.iter().filter_map(|&s| lookup(c, m, s)).collect();
                row.push(median(&vals).map(|v| v.to_string()).unwrap_or_default());
            }
            rows.push(row);
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_text(&header, rows)
}

fn run_metrics(outcome: &RunOutcome) -> Result<Vec<(String, f64)>, CliError> {
    let mut m = vec![("test_nll".to_string(), outcome.test_nll)];
    if let Some(&last) = outcome.loss_trace.last() {
        m.push(("final_train_loss".into(), last));
    }
    if let TrainedModel::Bnn(model) = &outcome.model {
        let train = outcome.dataset.subset(&outcome.split.train);
        let mut rng = Rng::derive(outcome.seed, PAC_STREAM);
        let (x, y) = (Tensor64::column(&train.x), Tensor64::column(&train.y));
        let e = expected_nll(model, &x, &y, 200, &mut rng)?;
        let inputs = PacBayesInputs::new(e, model.kl_to_prior(), train.len(), PAC_DELTA)?;
        m.push(("sigma_obs".into(), model.sigma_obs()));
        m.push(("kl_q_pi".into(), inputs.kl_q_pi));
        m.push(("train_expected_nll".into(), e));
        m.push(("pac_bayes_rhs".into(), probreg_core::metrics::pac_bayes_rhs(&inputs)));
    }
    Ok(m)
}

/// Trains and evaluates one configuration, writing its artifacts; the
/// dataset CSV must already exist.
fn run_one(cfg: &ExperimentConfig, case: Case, model: ModelKind, seed: u64) -> Result<RunRecord, CliError> {
    let outcome = run_experiment(model, case, seed, &cfg.protocol).map_err(|e| CliError::from_run(e, case, model, seed))?;
    let prefix = run_prefix(&cfg.out, case, model, seed);
    write(&with_suffix(&prefix, "_model.json"), outcome.model.to_json()?)?;
    write(&with_suffix(&prefix, "_loss.csv"), loss_csv(&outcome.loss_trace)?)?;
    let grid_path = with_suffix(&prefix, "_grid.csv");
    write(&grid_path, grid_csv(&outcome.grid)?)?;
    let record = RunRecord { case, model, seed, test_nll: outcome.test_nll, metrics: run_metrics(&outcome)? };
    write(&with_suffix(&prefix, "_metrics.csv"), metrics_csv(std::slice::from_ref(&record))?)?;

    let grid = svg::parse_grid(&read(&grid_path)?)?;
    let points = svg::parse_points(&read(&dataset_path(&cfg.out, case, seed))?)?;
    let title = format!("case {case}, {model}, seed {seed}: test NLL {:.4}", outcome.test_nll);
    write(&with_suffix(&prefix, "_plot.svg"), svg::render(&title, &grid, &points))?;
    Ok(record)
}

pub fn write_dataset(out: &Path, case: Case, seed: u64, n: usize) -> Result<PathBuf, CliError> {
    let (data, split) = prepare_data(case, seed, n)?;
    let path = dataset_path(out, case, seed);
    write(&path, dataset_csv(&data, &split)?)?;
    Ok(path)
}

/// Every `(case, model, seed)` run of `cfg`, in parallel, followed by the
/// summary table. Records come back in configuration order.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>, CliError> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    for &case in &cfg.cases {
        for &seed in &cfg.seeds {
            write_dataset(&cfg.out, case, seed, cfg.protocol.n)?;
        }
    }
    let jobs: Vec<(Case, ModelKind, u64)> = cfg
        .cases
        .iter()
        .flat_map(|&c| cfg.seeds.iter().flat_map(move |&s| cfg.models.iter().map(move |&m| (c, m, s))))
        .collect();
    let results: Vec<Result<RunRecord, CliError>> = jobs.par_iter().map(|&(c, m, s)| run_one(cfg, c, m, s)).collect();
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    write(&cfg.out.join("metrics.csv"), metrics_csv(&records)?)?;
    write(&cfg.out.join("summary.csv"), summary_csv(&records, &cfg.cases, &cfg.models, &cfg.seeds)?)?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(case: Case, model: ModelKind, seed: u64, v: f64) -> RunRecord {
        RunRecord { case, model, seed, test_nll: v, metrics: vec![("test_nll".into(), v)] }
    }

    #[test]
    fn summary_layout() {
        let r = vec![
            rec(Case::CubicA, ModelKind::Mdn, 0, 0.1),
            rec(Case::CubicA, ModelKind::Bnn, 0, 2.0),
            rec(Case::CubicA, ModelKind::Mdn, 1, -0.3),
            rec(Case::CubicA, ModelKind::Bnn, 1, 5.0),
        ];
        let s = summary_csv(&r, &[Case::CubicA], &ModelKind::ALL, &[0, 1]).unwrap();
        assert_eq!(s, "case,seed,mdn_nll,bnn_nll\nA,0,0.1,2\nA,1,-0.3,5\nA,median,-0.09999999999999999,3.5\n");
    }

    #[test]
    fn floats_use_shortest_roundtrip() {
        let m = metrics_csv(&[rec(Case::BimodalC, ModelKind::Bnn, 2, 0.1 + 0.2)]).unwrap();
        assert_eq!(m, "case,model,seed,metric,value\nC,bnn,2,test_nll,0.30000000000000004\n");
    }
}
