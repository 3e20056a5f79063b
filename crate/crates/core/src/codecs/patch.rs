//! Patch-dictionary encoder: a "where" grid of receptive fields crossed with
//! a "what" dictionary of learned stroke prototypes.
//!
//! Each receptive field of the binarized image activates the `winners`
//! prototypes with the highest cosine correlation to its content, at bit
//! `field * K + prototype`. Blank fields emit nothing.

use super::{CodecError, Dictionary};
use crate::bits::BitVector;
use crate::image::{GrayImage, MNIST_SIDE};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchEncoderConfig {
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Side of each square receptive field, in pixels.
    pub patch_size: usize,
    /// Number of prototypes `K`.
    pub dictionary_size: usize,
    /// Active prototypes per non-blank field `k`.
    pub winners: usize,
    pub binarize_threshold: f64,
}

impl Default for PatchEncoderConfig {
    fn default() -> Self {
        Self {
            grid_rows: 7,
            grid_cols: 7,
            patch_size: 4,
            dictionary_size: 16,
            winners: 2,
            binarize_threshold: 0.5,
        }
    }
}

impl PatchEncoderConfig {
    pub fn fields(&self) -> usize {
        self.grid_rows * self.grid_cols
    }

    pub fn code_len(&self) -> usize {
        self.fields() * self.dictionary_size
    }

    pub fn patch_pixels(&self) -> usize {
        self.patch_size * self.patch_size
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        let bad = |msg: &str| Err(CodecError::InvalidConfig(format!("encoder: {msg}")));
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return bad("grid dimensions must be positive");
        }
        if self.patch_size == 0 || self.patch_size > MNIST_SIDE {
            return bad("patch_size must lie in [1, 28]");
        }
        if self.grid_rows > MNIST_SIDE || self.grid_cols > MNIST_SIDE {
            return bad("grid cannot exceed the image side");
        }
        if self.dictionary_size == 0 || self.winners == 0 || self.winners > self.dictionary_size {
            return bad("need 1 <= winners <= dictionary_size");
        }
        if !(0.0..=1.0).contains(&self.binarize_threshold) {
            return bad("binarize_threshold must lie in [0, 1]");
        }
        Ok(())
    }

    /// Top-left offsets of the fields along one axis, spread evenly so the
    /// first field touches the top/left edge and the last the bottom/right.
    pub(crate) fn origins(&self, grid: usize) -> Vec<usize> {
        let span = MNIST_SIDE - self.patch_size;
        if grid == 1 {
            return vec![span / 2];
        }
        (0..grid)
            .map(|f| ((f * span) as f64 / (grid - 1) as f64).round() as usize)
            .collect()
    }

    /// Pixel offsets `(row, col)` of every field, row-major.
    pub(crate) fn field_origins(&self) -> Vec<(usize, usize)> {
        let rows = self.origins(self.grid_rows);
        let cols = self.origins(self.grid_cols);
        rows.iter()
            .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
            .collect()
    }

    /// Binarized content of every field.
    pub(crate) fn extract_patches<T: Scalar>(&self, image: &GrayImage<T>) -> Vec<Vec<T>> {
        let bin = image.binarize(T::lit(self.binarize_threshold));
        let p = self.patch_size;
        self.field_origins()
            .into_iter()
            .map(|(r0, c0)| {
                (0..p)
                    .flat_map(|dr| (0..p).map(move |dc| (dr, dc)))
                    .map(|(dr, dc)| bin.get(r0 + dr, c0 + dc))
                    .collect()
            })
            .collect()
    }
}

pub(crate) fn check_image<T: Scalar>(image: &GrayImage<T>) -> Result<(), CodecError> {
    if image.width() != MNIST_SIDE || image.height() != MNIST_SIDE {
        return Err(CodecError::ImageSize {
            width: image.width(),
            height: image.height(),
            expected: MNIST_SIDE,
        });
    }
    Ok(())
}

/// Encoder/decoder pair bound to a trained dictionary.
#[derive(Debug, Clone)]
pub struct PatchCodec<T> {
    cfg: PatchEncoderConfig,
    dictionary: Dictionary<T>,
    norms: Vec<T>,
    origins: Vec<(usize, usize)>,
}

impl<T: Scalar> PatchCodec<T> {
    pub fn new(cfg: PatchEncoderConfig, dictionary: Dictionary<T>) -> Result<Self, CodecError> {
        cfg.validate()?;
        if dictionary.is_empty()
            || dictionary.len() != cfg.dictionary_size
            || dictionary.patch_size() != cfg.patch_size
        {
            return Err(CodecError::UntrainedDictionary);
        }
        let norms = (0..dictionary.len())
            .map(|k| dictionary.prototype(k).iter().map(|&v| v * v).sum::<T>().sqrt())
            .collect();
        Ok(Self {
            origins: cfg.field_origins(),
            cfg,
            dictionary,
            norms,
        })
    }

    pub fn config(&self) -> &PatchEncoderConfig {
        &self.cfg
    }

    pub fn dictionary(&self) -> &Dictionary<T> {
        &self.dictionary
    }

    pub fn code_len(&self) -> usize {
        self.cfg.code_len()
    }

    pub fn encode(&self, image: &GrayImage<T>) -> Result<BitVector, CodecError> {
        check_image(image)?;
        let k_total = self.cfg.dictionary_size;
        let mut active = Vec::new();
        let mut scored: Vec<(T, usize)> = Vec::with_capacity(k_total);
        for (f, patch) in self.cfg.extract_patches(image).iter().enumerate() {
            if patch.iter().all(|v| v.is_zero()) {
                continue;
            }
            scored.clear();
            for k in 0..k_total {
                let dot: T = patch
                    .iter()
                    .zip(self.dictionary.prototype(k))
                    .map(|(&a, &b)| a * b)
                    .sum();
                let norm = self.norms[k];
                // the field's own norm is shared by every prototype and drops out of the ranking
                let sim = if norm > T::zero() { dot / norm } else { T::zero() };
                scored.push((sim, k));
            }
            // stable sort keeps the lower prototype index first on ties
            scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
            let mut winners: Vec<usize> = scored[..self.cfg.winners].iter().map(|&(_, k)| k).collect();
            winners.sort_unstable();
            active.extend(winners.into_iter().map(|k| f * k_total + k));
        }
        Ok(BitVector::from_active(self.code_len(), active).expect("fields emitted in order"))
    }

    /// Stamps the prototype of every active bit into its field, averages
    /// overlapping stamps and thresholds the result at 0.5.
    pub fn decode(&self, code: &BitVector) -> Result<GrayImage<T>, CodecError> {
        if code.len() != self.code_len() {
            return Err(CodecError::LengthMismatch {
                expected: self.code_len(),
                found: code.len(),
            });
        }
        let side = MNIST_SIDE;
        let p = self.cfg.patch_size;
        let k_total = self.cfg.dictionary_size;
        let mut sum = vec![T::zero(); side * side];
        let mut hits = vec![0u32; side * side];
        for bit in code.iter() {
            let (f, k) = (bit / k_total, bit % k_total);
            let (r0, c0) = self.origins[f];
            let proto = self.dictionary.prototype(k);
            for dr in 0..p {
                for dc in 0..p {
                    let idx = (r0 + dr) * side + c0 + dc;
                    sum[idx] = sum[idx] + proto[dr * p + dc];
                    hits[idx] += 1;
                }
            }
        }
        let half = T::lit(0.5);
        let pixels = sum
            .iter()
            .zip(&hits)
            .map(|(&s, &h)| {
                if h > 0 && s / T::lit(h as f64) >= half {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect();
        Ok(GrayImage::new(side, side, pixels).expect("28x28 buffer"))
    }
}
