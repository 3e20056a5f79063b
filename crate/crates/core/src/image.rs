//! Row-major grayscale images with intensities in `[0, 1]`.

use thiserror::Error;

use crate::Scalar;

/// Side length of an MNIST digit.
pub const MNIST_SIDE: usize = 28;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("{width}x{height} image needs {expected} pixels, got {found}")]
    PixelCount {
        width: usize,
        height: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T> {
    width: usize,
    height: usize,
    pixels: Vec<T>,
}

impl<T: Scalar> GrayImage<T> {
    pub fn new(width: usize, height: usize, pixels: Vec<T>) -> Result<Self, ImageError> {
        if pixels.len() != width * height {
            return Err(ImageError::PixelCount {
                width,
                height,
                expected: width * height,
                found: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![T::zero(); width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [T] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: T) {
        self.pixels[row * self.width + col] = v;
    }

    /// 1 where the intensity is at least `threshold`, 0 elsewhere.
    pub fn binarize(&self, threshold: T) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self
                .pixels
                .iter()
                .map(|&p| if p >= threshold { T::one() } else { T::zero() })
                .collect(),
        }
    }

    /// Number of pixels at full intensity after binarizing at 0.5.
    pub fn count_on(&self) -> usize {
        let half = T::lit(0.5);
        self.pixels.iter().filter(|&&p| p >= half).count()
    }

    /// 8-bit rendering, clamped to `[0, 255]`.
    pub fn to_u8(&self) -> Vec<u8> {
        let scale = T::lit(255.0);
        self.pixels
            .iter()
            .map(|&p| {
                let v = (p * scale).round().to_f64().unwrap_or(0.0);
                v.clamp(0.0, 255.0) as u8
            })
            .collect()
    }

    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self, ImageError> {
        let scale = T::lit(255.0);
        Self::new(
            width,
            height,
            bytes.iter().map(|&b| T::lit(b as f64) / scale).collect(),
        )
    }
}
