//! Transforms between raw data and sparse binary codes.

mod dictionary;
mod noise;
mod nxh;
mod patch;

use thiserror::Error;

pub use dictionary::{learn_dictionary, Dictionary, KMeansOptions, DICTIONARY_MAGIC, DICTIONARY_VERSION};
pub use noise::{delete_bits, sparsify};
pub use nxh::{NxhConfig, NxhDecoded};
pub use patch::{PatchCodec, PatchEncoderConfig};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum CodecError {
    #[error("label {label} outside [0, {classes})")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dictionary is untrained or does not match the encoder configuration")]
    UntrainedDictionary,

    #[error("code has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("image is {width}x{height}, expected {expected}x{expected}")]
    ImageSize {
        width: usize,
        height: usize,
        expected: usize,
    },

    #[error("cannot learn a dictionary from an empty training set")]
    EmptyTrainingSet,

    #[error("need {needed} distinct non-blank patches, only {available} available")]
    TooFewPatches { needed: usize, available: usize },
}
