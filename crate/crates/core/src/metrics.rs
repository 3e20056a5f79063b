//! Reconstruction and code statistics.

use thiserror::Error;

use crate::bits::BitVector;
use crate::image::GrayImage;
use crate::Scalar;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("image sets differ in shape")]
    ShapeMismatch,

    #[error("statistics of an empty set are undefined")]
    Empty,

    #[error("optimal sparsity needs a pattern length above 4, got {0}")]
    PatternTooShort(usize),
}

fn check<T: Scalar>(a: &[GrayImage<T>], b: &[GrayImage<T>]) -> Result<(), MetricsError> {
    if a.is_empty() {
        return Err(MetricsError::Empty);
    }
    if a.len() != b.len()
        || a
            .iter()
            .zip(b)
            .any(|(x, y)| x.width() != y.width() || x.height() != y.height())
    {
        return Err(MetricsError::ShapeMismatch);
    }
    Ok(())
}

/// Mean over images of the per-pixel mean squared difference.
pub fn mse<T: Scalar>(originals: &[GrayImage<T>], recon: &[GrayImage<T>]) -> Result<T, MetricsError> {
    let (lost, extra) = split_sums(originals, recon)?;
    Ok(lost + extra)
}

/// MSE restricted to pixels where the original is brighter (`lost`) and
/// where the reconstruction is brighter (`extra`).
pub fn mse_split<T: Scalar>(
    originals: &[GrayImage<T>],
    recon: &[GrayImage<T>],
) -> Result<(T, T), MetricsError> {
    split_sums(originals, recon)
}

fn split_sums<T: Scalar>(a: &[GrayImage<T>], b: &[GrayImage<T>]) -> Result<(T, T), MetricsError> {
    check(a, b)?;
    let mut lost = T::zero();
    let mut extra = T::zero();
    for (x, y) in a.iter().zip(b) {
        let (mut l, mut e) = (T::zero(), T::zero());
        for (&p, &q) in x.pixels().iter().zip(y.pixels()) {
            let d = p - q;
            if d > T::zero() {
                l = l + d * d;
            } else {
                e = e + d * d;
            }
        }
        let px = T::lit(x.pixels().len() as f64);
        lost = lost + l / px;
        extra = extra + e / px;
    }
    let n = T::lit(a.len() as f64);
    Ok((lost / n, extra / n))
}

/// Popcount statistics over a set of codes (population standard deviation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitStats {
    pub mean: f64,
    pub std: f64,
    pub min: usize,
    pub max: usize,
}

pub fn bit_stats<'a, I>(codes: I) -> Result<BitStats, MetricsError>
where
    I: IntoIterator<Item = &'a BitVector>,
{
    let counts: Vec<usize> = codes.into_iter().map(BitVector::count_ones).collect();
    count_stats(&counts)
}

pub fn count_stats(counts: &[usize]) -> Result<BitStats, MetricsError> {
    if counts.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<usize>() as f64 / n;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n;
    Ok(BitStats {
        mean,
        std: var.sqrt(),
        min: *counts.iter().min().unwrap(),
        max: *counts.iter().max().unwrap(),
    })
}

/// Capacity-optimal number of active bits for patterns of length `n`: `log2(n / 4)`.
pub fn optimal_sparsity(n: usize) -> Result<f64, MetricsError> {
    if n <= 4 {
        return Err(MetricsError::PatternTooShort(n));
    }
    Ok((n as f64 / 4.0).log2())
}
