use std::io;
use std::path::PathBuf;

use thiserror::Error;
use willshaw::data::DataError;
use willshaw::metrics::MetricsError;
use willshaw::{CodecError, FormatError, MemoryError, MultimodalError};

use crate::config::ConfigError;

#[derive(Error, Debug)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("missing artifact {0} (run `train` first)")]
    MissingArtifact(PathBuf),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },

    #[error(transparent)]
    Data(#[from] DataError),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("no generation attempt converged ({attempts} attempts)")]
    NoConvergence { attempts: usize },

    #[error(transparent)]
    Codec(#[from] CodecError),

    #[error(transparent)]
    Memory(#[from] MemoryError),

    #[error(transparent)]
    Multimodal(#[from] MultimodalError),

    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl ExperimentError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| ExperimentError::Io { path, source }
    }

    pub fn format(path: impl Into<PathBuf>) -> impl FnOnce(FormatError) -> Self {
        let path = path.into();
        move |source| ExperimentError::Format { path, source }
    }

    /// Process exit status: 3 config, 4 I/O and artifacts, 5 convergence, 1 otherwise.
    /// Command-line usage errors exit with 2 before any of these can occur.
    pub fn exit_code(&self) -> u8 {
        match self {
            ExperimentError::Config(_) => 3,
            ExperimentError::MissingArtifact(_)
            | ExperimentError::Io { .. }
            | ExperimentError::Format { .. }
            | ExperimentError::Data(_)
            | ExperimentError::Csv(_) => 4,
            ExperimentError::NoConvergence { .. } => 5,
            _ => 1,
        }
    }
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;
