//! Experiment configuration: an optional JSON file with flag overrides on
//! top. Flags win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use probreg_core::bnn::{KlWeight, ObsNoise};
use probreg_core::data::Case;
use probreg_core::metrics::{ModelKind, Protocol};

use crate::error::CliError;

/// Environment variable that overrides the output directory.
pub const OUT_ENV: &str = "PROBREG_OUT";
pub const DEFAULT_SEEDS: [u64; 3] = [0, 1, 2];
pub const QUICK_EPOCHS: usize = 500;

/// Every field optional; absent fields take protocol defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub case: Option<String>,
    pub model: Option<String>,
    pub seeds: Option<Vec<u64>>,
    pub n: Option<usize>,
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub components: Option<usize>,
    pub hidden: Option<usize>,
    pub mc_draws: Option<usize>,
    /// Explicit KL weight; `1/n_train` when absent.
    pub kl_weight: Option<f64>,
    /// Freezes the BNN observation noise at this value; learned when absent.
    pub sigma_obs: Option<f64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Values given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub case: Option<String>,
    pub model: Option<String>,
    pub seeds: Vec<u64>,
    pub epochs: Option<usize>,
    pub out: Option<PathBuf>,
    pub quick: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub cases: Vec<Case>,
    pub models: Vec<ModelKind>,
    pub seeds: Vec<u64>,
    pub protocol: Protocol,
    pub out: PathBuf,
    pub quick: bool,
}

pub fn parse_cases(s: &str) -> Result<Vec<Case>, CliError> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Case::TABLE.to_vec());
    }
    s.parse::<Case>().map(|c| vec![c]).map_err(|_| CliError::Usage(format!("unknown case `{s}` (A, B, C, D, intro or all)")))
}

pub fn parse_models(s: &str) -> Result<Vec<ModelKind>, CliError> {
    if s.eq_ignore_ascii_case("both") {
        return Ok(ModelKind::ALL.to_vec());
    }
    s.parse::<ModelKind>().map(|m| vec![m]).map_err(|_| CliError::Usage(format!("unknown model `{s}` (mdn, bnn or both)")))
}

impl ExperimentConfig {
    pub fn resolve(file: FileConfig, flags: Overrides) -> Result<Self, CliError> {
        let cases = parse_cases(flags.case.as_deref().or(file.case.as_deref()).unwrap_or("all"))?;
        let models = parse_models(flags.model.as_deref().or(file.model.as_deref()).unwrap_or("both"))?;
        let seeds = if !flags.seeds.is_empty() {
            flags.seeds
        } else {
            file.seeds.unwrap_or_else(|| DEFAULT_SEEDS.to_vec())
        };
        let mut p = Protocol::default();
        if let Some(n) = file.n {
            p.n = n;
        }
        if let Some(lr) = file.lr {
            p.mdn.lr = lr;
            p.bnn.lr = lr;
        }
        if let Some(k) = file.components {
            p.mdn.components = k;
        }
        if let Some(h) = file.hidden {
            p.mdn.hidden = h;
            p.bnn.hidden = h;
        }
        if let Some(t) = file.mc_draws {
            p.mc_draws = t;
        }
        if let Some(w) = file.kl_weight {
            p.bnn.kl_weight = KlWeight::Fixed(w);
        }
        if let Some(s) = file.sigma_obs {
            p.bnn.obs_noise = ObsNoise::Frozen(s);
        }
        let epochs = flags.epochs.or(if flags.quick { Some(QUICK_EPOCHS) } else { file.epochs });
        if let Some(e) = epochs {
            p = p.with_epochs(e);
        }
        let out = flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("out"));
        let cfg = Self { cases, models, seeds, protocol: p, out, quick: flags.quick };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.protocol;
        let bad = |what: &str| Err(CliError::Usage(format!("{what} must be positive")));
        if self.seeds.is_empty() {
            return Err(CliError::Usage("at least one seed is required".into()));
        }
        if p.n < 5 {
            return Err(CliError::Usage(format!("n = {} is too small to split; need at least 5", p.n)));
        }
        if p.mdn.epochs == 0 {
            return bad("epochs");
        }
        if !(p.mdn.lr > 0.0) || !p.mdn.lr.is_finite() {
            return bad("lr");
        }
        if p.mdn.components == 0 {
            return bad("components");
        }
        if p.mdn.hidden == 0 {
            return bad("hidden");
        }
        if p.mc_draws < 2 {
            return Err(CliError::Usage("mc_draws must be at least 2".into()));
        }
        if let KlWeight::Fixed(w) = p.bnn.kl_weight {
            if !(w > 0.0) {
                return bad("kl_weight");
            }
        }
        if let ObsNoise::Frozen(s) = p.bnn.obs_noise {
            if !(s > 0.0) {
                return bad("sigma_obs");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: FileConfig = serde_json::from_str(r#"{"case":"B","epochs":10,"seeds":[4],"out":"x"}"#).unwrap();
        let flags = Overrides { case: Some("c".into()), epochs: Some(20), out: Some("y".into()), ..Overrides::default() };
        let c = ExperimentConfig::resolve(file, flags).unwrap();
        assert_eq!(c.cases, vec![Case::BimodalC]);
        assert_eq!(c.protocol.mdn.epochs, 20);
        assert_eq!(c.protocol.bnn.epochs, 20);
        assert_eq!(c.seeds, vec![4]);
        assert_eq!(c.out, PathBuf::from("y"));
    }

    #[test]
    fn defaults() {
        let c = ExperimentConfig::resolve(FileConfig::default(), Overrides::default()).unwrap();
        assert_eq!(c.cases, Case::TABLE.to_vec());
        assert_eq!(c.models, ModelKind::ALL.to_vec());
        assert_eq!(c.seeds, DEFAULT_SEEDS.to_vec());
        assert_eq!(c.protocol, Protocol::default());
    }

    #[test]
    fn quick_unless_epochs_given() {
        let q = Overrides { quick: true, ..Overrides::default() };
        assert_eq!(ExperimentConfig::resolve(FileConfig::default(), q.clone()).unwrap().protocol.mdn.epochs, 500);
        let qe = Overrides { epochs: Some(7), ..q };
        assert_eq!(ExperimentConfig::resolve(FileConfig::default(), qe).unwrap().protocol.bnn.epochs, 7);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        for json in [r#"{"epochs":0}"#, r#"{"lr":-1}"#, r#"{"n":3}"#, r#"{"case":"E"}"#, r#"{"model":"gp"}"#, r#"{"sigma_obs":0}"#] {
            let file: FileConfig = serde_json::from_str(json).unwrap();
            let err = ExperimentConfig::resolve(file, Overrides::default()).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{json}");
        }
        assert!(serde_json::from_str::<FileConfig>(r#"{"epoch":3}"#).is_err());
    }
}
