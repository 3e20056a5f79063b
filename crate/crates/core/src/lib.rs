//! Willshaw associative memory over sparse binary codes, with a
//! multiple-modality layer for classification and generation.
//!
//! The binary side ([`BitVector`], [`WillshawMemory`], label codes, the
//! multi-modal operations) is exact integer arithmetic. The real-valued side
//! (images, patch dictionaries, reconstruction metrics) is generic over a
//! [`Scalar`] float; the aliases below fix it to `f32` or `f64`.

pub mod bits;
pub mod codecs;
pub mod data;
pub mod format;
pub mod image;
pub mod memory;
pub mod metrics;
pub mod multimodal;
mod scalar;

pub use bits::{BitError, BitVector};
pub use codecs::{CodecError, KMeansOptions, NxhConfig, NxhDecoded, PatchEncoderConfig};
pub use format::FormatError;
pub use memory::{MemoryError, PotentialSummary, Retrieval, WillshawMemory};
pub use multimodal::{
    Classification, DesCode, Generation, GenerationConfig, IntervalEstimate, ModalitySchema, MultiModal,
    MultimodalError, TraceStep,
};
pub use scalar::Scalar;

pub type Image = image::GrayImage<f32>;
pub type Image64 = image::GrayImage<f64>;
pub type Dataset = data::Dataset<f32>;
pub type Dataset64 = data::Dataset<f64>;
pub type Dictionary = codecs::Dictionary<f32>;
pub type Dictionary64 = codecs::Dictionary<f64>;
pub type PatchCodec = codecs::PatchCodec<f32>;
pub type PatchCodec64 = codecs::PatchCodec<f64>;
