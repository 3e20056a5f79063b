//! Experiment harness: training, retrieval, completion, classification and
//! generation runs over MNIST desCodes, emitting CSV metrics and PGM montages.

pub mod commands;
pub mod config;
pub mod error;
pub mod montage;
pub mod output;
pub mod pipeline;
pub mod streams;

pub use config::{ConfigError, ExperimentConfig};
pub use error::ExperimentError;
pub use pipeline::{Context, Encoded};
