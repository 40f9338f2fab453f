use probreg_core::data::Case;
use probreg_core::metrics::ModelKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("training diverged: case {case}, model {model}, seed {seed}, epoch {epoch} (loss {loss})")]
    Diverged { case: Case, model: ModelKind, seed: u64, epoch: usize, loss: f64 },
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
    #[error(transparent)]
    Core(#[from] probreg_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Diverged { .. } => 3,
            CliError::Core(probreg_core::Error::Config(_)) => 2,
            CliError::Core(probreg_core::Error::Divergence { .. }) => 3,
            _ => 1,
        }
    }

    /// Attaches the run identity to a training divergence.
    pub fn from_run(err: probreg_core::Error, case: Case, model: ModelKind, seed: u64) -> Self {
        match err {
            probreg_core::Error::Divergence { epoch, loss } => CliError::Diverged { case, model, seed, epoch, loss },
            other => CliError::Core(other),
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}
