//! Patch prototypes: k-means learning and the `WDC1` file format.
//!
//! `WDC1` layout, little-endian:
//! `"WDC1" | version: u32 = 1 | K: u32 | patch_size: u32 | K·patch_size² f32`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::patch::check_image;
use super::{CodecError, PatchEncoderConfig};
use crate::format::{read_section, FormatError};
use crate::image::GrayImage;
use crate::Scalar;

pub const DICTIONARY_MAGIC: [u8; 4] = *b"WDC1";
pub const DICTIONARY_VERSION: u32 = 1;

/// `K` prototypes of `patch_size²` intensities each, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary<T> {
    patch_size: usize,
    prototypes: Vec<T>,
}

impl<T: Scalar> Dictionary<T> {
    pub fn new(patch_size: usize, prototypes: Vec<T>) -> Result<Self, CodecError> {
        let px = patch_size * patch_size;
        if patch_size == 0 || !prototypes.len().is_multiple_of(px) {
            return Err(CodecError::InvalidConfig(format!(
                "dictionary: {} values do not split into {patch_size}x{patch_size} prototypes",
                prototypes.len()
            )));
        }
        Ok(Self {
            patch_size,
            prototypes,
        })
    }

    pub fn patch_size(&self) -> usize {
        self.patch_size
    }

    /// Number of prototypes `K`.
    pub fn len(&self) -> usize {
        self.prototypes.len() / (self.patch_size * self.patch_size)
    }

    pub fn is_empty(&self) -> bool {
        self.prototypes.is_empty()
    }

    pub fn prototype(&self, k: usize) -> &[T] {
        let px = self.patch_size * self.patch_size;
        &self.prototypes[k * px..(k + 1) * px]
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), FormatError> {
        w.write_all(&DICTIONARY_MAGIC)?;
        w.write_all(&DICTIONARY_VERSION.to_le_bytes())?;
        w.write_all(&(self.len() as u32).to_le_bytes())?;
        w.write_all(&(self.patch_size as u32).to_le_bytes())?;
        for v in &self.prototypes {
            let v = v.to_f32().ok_or(FormatError::InvalidValue("prototype"))?;
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, FormatError> {
        let header = read_section(&mut r, 16, "header")?;
        let magic: [u8; 4] = header[0..4].try_into().unwrap();
        if magic != DICTIONARY_MAGIC {
            return Err(FormatError::BadMagic(magic));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != DICTIONARY_VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let k = u32::from_le_bytes(header[8..12].try_into().unwrap()) as u64;
        let p = u32::from_le_bytes(header[12..16].try_into().unwrap()) as u64;
        if k == 0 || p == 0 {
            return Err(FormatError::InvalidDimensions { m: k, n: p });
        }
        let payload = read_section(&mut r, k * p * p * 4, "payload")?;
        let prototypes = payload
            .chunks_exact(4)
            .map(|b| {
                let v = f32::from_le_bytes(b.try_into().unwrap());
                T::from_f32(v).filter(|v| v.is_finite())
            })
            .collect::<Option<Vec<T>>>()
            .ok_or(FormatError::InvalidValue("prototype"))?;
        Ok(Self {
            patch_size: p as usize,
            prototypes,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FormatError> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FormatError> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansOptions {
    /// Non-blank patches drawn from the training set.
    pub sample_patches: usize,
    pub max_iters: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            sample_patches: 20_000,
            max_iters: 30,
        }
    }
}

fn sq_dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

fn nearest<T: Scalar>(patch: &[T], centroids: &[Vec<T>]) -> usize {
    let mut best = (0, sq_dist(patch, &centroids[0]));
    for (k, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(patch, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best.0
}

/// Learns `cfg.dictionary_size` prototypes by k-means over randomly sampled
/// non-blank binarized patches.
///
/// Centroids start from distinct sampled patches and Lloyd iterations run
/// until assignments stop changing or `opts.max_iters` is reached. Empty
/// clusters keep their previous centroid.
pub fn learn_dictionary<T: Scalar, R: Rng + ?Sized>(
    images: &[GrayImage<T>],
    cfg: &PatchEncoderConfig,
    opts: &KMeansOptions,
    rng: &mut R,
) -> Result<Dictionary<T>, CodecError> {
    cfg.validate()?;
    if images.is_empty() {
        return Err(CodecError::EmptyTrainingSet);
    }
    let k = cfg.dictionary_size;

    // (image, field) of every non-blank patch, then a uniform sample of them
    let mut locations: Vec<(u32, u32)> = Vec::new();
    for (i, img) in images.iter().enumerate() {
        check_image(img)?;
        for (f, patch) in cfg.extract_patches(img).iter().enumerate() {
            if patch.iter().any(|v| !v.is_zero()) {
                locations.push((i as u32, f as u32));
            }
        }
    }
    let take = opts.sample_patches.min(locations.len());
    let mut picked: Vec<usize> = index::sample(rng, locations.len(), take).into_vec();
    picked.sort_unstable();
    let samples: Vec<Vec<T>> = picked
        .iter()
        .map(|&l| {
            let (i, f) = locations[l];
            cfg.extract_patches(&images[i as usize]).swap_remove(f as usize)
        })
        .collect();

    let mut distinct: Vec<Vec<bool>> = samples
        .iter()
        .map(|s| s.iter().map(|v| !v.is_zero()).collect())
        .collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < k {
        return Err(CodecError::TooFewPatches {
            needed: k,
            available: distinct.len(),
        });
    }
    distinct.shuffle(rng);
    let mut centroids: Vec<Vec<T>> = distinct[..k]
        .iter()
        .map(|d| d.iter().map(|&b| if b { T::one() } else { T::zero() }).collect())
        .collect();

    let px = cfg.patch_pixels();
    let mut assign = vec![usize::MAX; samples.len()];
    for _ in 0..opts.max_iters.max(1) {
        let mut changed = false;
        for (s, a) in samples.iter().zip(assign.iter_mut()) {
            let n = nearest(s, &centroids);
            if *a != n {
                *a = n;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![T::zero(); px]; k];
        let mut counts = vec![0usize; k];
        for (s, &a) in samples.iter().zip(&assign) {
            counts[a] += 1;
            for (acc, &v) in sums[a].iter_mut().zip(s) {
                *acc = *acc + v;
            }
        }
        for ((c, sum), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
            if n > 0 {
                let n = T::lit(n as f64);
                *c = sum.into_iter().map(|v| v / n).collect();
            }
        }
    }
    Dictionary::new(cfg.patch_size, centroids.concat())
}
