//! MNIST IDX ingestion.
//!
//! Both the raw big-endian IDX files and their gzipped distribution form are
//! accepted; gzip is detected from the stream's first two bytes.

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use thiserror::Error;

use crate::image::GrayImage;
use crate::Scalar;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;
pub const NUM_CLASSES: u8 = 10;

#[derive(Error, Debug)]
pub enum DataError {
    #[error("bad IDX magic: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { expected: u32, found: u32 },

    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },

    #[error("truncated IDX {section}: expected {expected} bytes, got {found}")]
    Truncated {
        section: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("label {0} outside [0, 10)")]
    BadLabel(u8),

    #[error("degenerate image shape {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },

    #[error("{path}: {source}")]
    Open { path: String, source: io::Error },

    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Images with intensities normalised to `[0, 1]` and their digit labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub images: Vec<GrayImage<T>>,
    pub labels: Vec<u8>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(images: Vec<GrayImage<T>>, labels: Vec<u8>) -> Result<Self, DataError> {
        if images.len() != labels.len() {
            return Err(DataError::CountMismatch {
                images: images.len(),
                labels: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= NUM_CLASSES) {
            return Err(DataError::BadLabel(bad));
        }
        Ok(Self { images, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// First `n` items (or all of them).
    pub fn truncate(mut self, n: usize) -> Self {
        self.images.truncate(n);
        self.labels.truncate(n);
        self
    }
}

fn read_exact_or<R: Read>(r: &mut R, len: usize, section: &'static str) -> Result<Vec<u8>, DataError> {
    let mut buf = Vec::new();
    r.take(len as u64).read_to_end(&mut buf)?;
    if buf.len() < len {
        return Err(DataError::Truncated {
            section,
            expected: len,
            found: buf.len(),
        });
    }
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R, section: &'static str) -> Result<u32, DataError> {
    let b = read_exact_or(r, 4, section)?;
    Ok(u32::from_be_bytes(b[..4].try_into().unwrap()))
}

/// Wraps the reader in a gzip decoder when the stream is gzipped.
fn maybe_gunzip<'a, R: Read + 'a>(r: R) -> io::Result<Box<dyn Read + 'a>> {
    let mut r = BufReader::new(r);
    let head = {
        use std::io::BufRead;
        r.fill_buf()?.get(..2).map(|h| [h[0], h[1]])
    };
    if head == Some([0x1f, 0x8b]) {
        Ok(Box::new(GzDecoder::new(r)))
    } else {
        Ok(Box::new(r))
    }
}

/// Parses an IDX3 image file into normalised images.
pub fn parse_idx_images<T: Scalar, R: Read>(r: R) -> Result<Vec<GrayImage<T>>, DataError> {
    let mut r = maybe_gunzip(r)?;
    let magic = read_u32(&mut r, "image header")?;
    if magic != IMAGE_MAGIC {
        return Err(DataError::BadMagic {
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let count = read_u32(&mut r, "image header")? as usize;
    let rows = read_u32(&mut r, "image header")? as usize;
    let cols = read_u32(&mut r, "image header")? as usize;
    if rows == 0 || cols == 0 {
        return Err(DataError::BadShape { rows, cols });
    }
    let size = rows * cols;
    let raw = read_exact_or(&mut r, count * size, "image payload")?;
    Ok(raw
        .chunks_exact(size)
        .map(|px| GrayImage::from_u8(cols, rows, px).expect("chunk has rows*cols pixels"))
        .collect())
}

pub fn parse_idx_labels<R: Read>(r: R) -> Result<Vec<u8>, DataError> {
    let mut r = maybe_gunzip(r)?;
    let magic = read_u32(&mut r, "label header")?;
    if magic != LABEL_MAGIC {
        return Err(DataError::BadMagic {
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let count = read_u32(&mut r, "label header")? as usize;
    read_exact_or(&mut r, count, "label payload")
}

fn open(path: &Path) -> Result<File, DataError> {
    File::open(path).map_err(|source| DataError::Open {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a paired IDX image/label file set.
pub fn load_idx<T: Scalar>(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<Dataset<T>, DataError> {
    let images = parse_idx_images(open(images_path.as_ref())?)?;
    let labels = parse_idx_labels(open(labels_path.as_ref())?)?;
    Dataset::new(images, labels)
}

/// Writes images as an uncompressed IDX3 stream (intensities re-quantised to bytes).
pub fn write_idx_images<T: Scalar, W: Write>(mut w: W, images: &[GrayImage<T>]) -> io::Result<()> {
    let (rows, cols) = images.first().map_or((0, 0), |i| (i.height(), i.width()));
    w.write_all(&IMAGE_MAGIC.to_be_bytes())?;
    w.write_all(&(images.len() as u32).to_be_bytes())?;
    w.write_all(&(rows as u32).to_be_bytes())?;
    w.write_all(&(cols as u32).to_be_bytes())?;
    for img in images {
        w.write_all(&img.to_u8())?;
    }
    w.flush()
}

pub fn write_idx_labels<W: Write>(mut w: W, labels: &[u8]) -> io::Result<()> {
    w.write_all(&LABEL_MAGIC.to_be_bytes())?;
    w.write_all(&(labels.len() as u32).to_be_bytes())?;
    w.write_all(labels)?;
    w.flush()
}
