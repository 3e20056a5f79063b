//! The Willshaw network: a binary weight matrix trained by OR-ing outer
//! products and read out with a soft (winner-take-all) threshold.
//!
//! Weights are bit-packed row-major in 64-bit words, least significant bit
//! first. Row `i` holds the synapses from input `i` to every output, so the
//! potentials of a cue are the column-wise sum of the cue's rows.

mod counters;
mod persist;

use rayon::prelude::*;
use thiserror::Error;

use crate::bits::BitVector;
use counters::SlicedCounts;

pub use persist::{HEADER_LEN, MAGIC, VERSION};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum MemoryError {
    #[error("{what} has length {found}, memory expects {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

/// Binary associative memory of `m` inputs by `n` outputs.
#[derive(Clone, PartialEq, Eq)]
pub struct WillshawMemory {
    m: usize,
    n: usize,
    words_per_row: usize,
    weights: Vec<u64>,
    stored: u64,
}

/// Min / mean / max of the dendritic potentials of one retrieval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSummary {
    pub min: u32,
    pub mean: f64,
    pub max: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Retrieval {
    pub output: BitVector,
    /// The soft threshold, i.e. the largest potential. Zero means the cue
    /// carried no evidence and the output is empty.
    pub max_potential: u32,
    pub potentials: PotentialSummary,
}

impl WillshawMemory {
    /// Fresh all-zero memory.
    ///
    /// Panics if either dimension is zero.
    pub fn new(m: usize, n: usize) -> Self {
        assert!(m > 0 && n > 0, "memory dimensions must be positive");
        let words_per_row = n.div_ceil(64);
        Self {
            m,
            n,
            words_per_row,
            weights: vec![0; m * words_per_row],
            stored: 0,
        }
    }

    /// Square memory for auto-association.
    pub fn auto(n: usize) -> Self {
        Self::new(n, n)
    }

    pub fn input_len(&self) -> usize {
        self.m
    }

    pub fn output_len(&self) -> usize {
        self.n
    }

    /// Number of `store` calls folded into the matrix.
    pub fn stored_count(&self) -> u64 {
        self.stored
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.m && j < self.n);
        (self.weights[i * self.words_per_row + j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.weights[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    /// Number of synapses set to one.
    pub fn count_ones(&self) -> u64 {
        self.weights.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Fraction of the matrix set to one.
    pub fn fill(&self) -> f64 {
        self.count_ones() as f64 / (self.m as f64 * self.n as f64)
    }

    fn check(&self, what: &'static str, expected: usize, v: &BitVector) -> Result<(), MemoryError> {
        if v.len() != expected {
            return Err(MemoryError::DimensionMismatch {
                what,
                expected,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Stores the association `question -> answer`: every synapse between an
    /// active question bit and an active answer bit becomes one.
    pub fn store(&mut self, question: &BitVector, answer: &BitVector) -> Result<(), MemoryError> {
        self.check("question", self.m, question)?;
        self.check("answer", self.n, answer)?;
        let answer_words: Vec<(usize, u64)> = answer
            .to_words()
            .into_iter()
            .enumerate()
            .filter(|&(_, w)| w != 0)
            .collect();
        for i in question.iter() {
            let row = &mut self.weights[i * self.words_per_row..(i + 1) * self.words_per_row];
            for &(w, bits) in &answer_words {
                row[w] |= bits;
            }
        }
        self.stored += 1;
        Ok(())
    }

    /// Auto-associative store, `pattern -> pattern`.
    pub fn store_auto(&mut self, pattern: &BitVector) -> Result<(), MemoryError> {
        self.store(pattern, pattern)
    }

    /// Folds a whole dataset of auto-associative patterns in one pass.
    ///
    /// Chunks are trained independently in parallel and OR-merged, which
    /// gives the same matrix as sequential `store_auto` calls.
    pub fn store_batch(&mut self, patterns: &[BitVector]) -> Result<(), MemoryError> {
        for p in patterns {
            self.check("pattern", self.m, p)?;
            self.check("pattern", self.n, p)?;
        }
        const CHUNK: usize = 512;
        let (m, n) = (self.m, self.n);
        let partial = patterns
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut mem = WillshawMemory::new(m, n);
                for p in chunk {
                    mem.store_auto(p).expect("dimensions checked");
                }
                mem
            })
            .reduce_with(|mut a, b| {
                a.merge(&b).expect("same dimensions");
                a
            });
        if let Some(partial) = partial {
            self.merge(&partial)?;
        }
        Ok(())
    }

    /// OR-merges another memory of identical shape into this one.
    pub fn merge(&mut self, other: &WillshawMemory) -> Result<(), MemoryError> {
        if self.m != other.m || self.n != other.n {
            return Err(MemoryError::DimensionMismatch {
                what: "merged memory",
                expected: self.m * self.n,
                found: other.m * other.n,
            });
        }
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a |= b;
        }
        self.stored += other.stored;
        Ok(())
    }

    /// Entry-wise `self ⊇ other`.
    pub fn covers(&self, other: &WillshawMemory) -> bool {
        self.m == other.m
            && self.n == other.n
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| a & b == *b)
    }

    pub fn is_symmetric(&self) -> bool {
        self.m == self.n && (0..self.m).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Mask of the `n` real columns inside the padded last word.
    fn valid_columns(&self) -> Vec<u64> {
        let mut valid = vec![u64::MAX; self.words_per_row];
        let tail = self.n % 64;
        if tail != 0 {
            valid[self.words_per_row - 1] = (1u64 << tail) - 1;
        }
        valid
    }

    /// Dendritic potentials `s_j = Σ_i W_ij · cue_i`.
    pub fn potentials(&self, cue: &BitVector) -> Result<Vec<u32>, MemoryError> {
        self.check("cue", self.m, cue)?;
        let counts = SlicedCounts::accumulate(&self.weights, self.words_per_row, cue.active());
        Ok((0..self.n).map(|j| counts.value(j)).collect())
    }

    /// One-step retrieval with the soft threshold `θ = max_j s_j`.
    ///
    /// Every neuron whose potential reaches the maximum fires. A cue that
    /// reaches nothing (`θ = 0`) yields an all-zero output.
    pub fn retrieve(&self, cue: &BitVector) -> Result<Retrieval, MemoryError> {
        self.check("cue", self.m, cue)?;
        let counts = SlicedCounts::accumulate(&self.weights, self.words_per_row, cue.active());
        let valid = self.valid_columns();
        let (max, mask) = counts.max_mask(&valid);
        let min = counts.min(&valid);
        let total: u64 = cue
            .iter()
            .map(|i| self.row_words(i).iter().map(|w| w.count_ones() as u64).sum::<u64>())
            .sum();
        let output = if max == 0 {
            BitVector::zeros(self.n)
        } else {
            BitVector::from_words(self.n, &mask)
        };
        Ok(Retrieval {
            output,
            max_potential: max,
            potentials: PotentialSummary {
                min,
                mean: total as f64 / self.n as f64,
                max,
            },
        })
    }

    /// Retrieves many cues in parallel; the memory is only read.
    pub fn retrieve_many(&self, cues: &[BitVector]) -> Result<Vec<Retrieval>, MemoryError> {
        cues.par_iter().map(|c| self.retrieve(c)).collect()
    }
}

impl std::fmt::Debug for WillshawMemory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WillshawMemory")
            .field("m", &self.m)
            .field("n", &self.n)
            .field("stored", &self.stored)
            .field("ones", &self.count_ones())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(bits: &[u8]) -> BitVector {
        BitVector::from_01(bits)
    }

    fn matrix(mem: &WillshawMemory) -> Vec<Vec<u8>> {
        (0..mem.input_len())
            .map(|i| (0..mem.output_len()).map(|j| mem.get(i, j) as u8).collect())
            .collect()
    }

    #[test]
    fn single_pattern_outer_product() {
        let mut mem = WillshawMemory::auto(2);
        mem.store_auto(&bv(&[0, 1])).unwrap();
        assert_eq!(matrix(&mem), vec![vec![0, 0], vec![0, 1]]);
        assert_eq!(mem.stored_count(), 1);
    }

    #[test]
    fn zero_pattern_leaves_weights() {
        let mut mem = WillshawMemory::auto(5);
        mem.store_auto(&bv(&[1, 0, 0, 1, 0])).unwrap();
        let before = mem.clone();
        mem.store_auto(&BitVector::zeros(5)).unwrap();
        assert!(before.covers(&mem) && mem.covers(&before));
        assert_eq!(mem.stored_count(), 2);
    }

    #[test]
    fn dimension_errors() {
        let mut mem = WillshawMemory::new(3, 4);
        let err = mem.store(&BitVector::zeros(4), &BitVector::zeros(4)).unwrap_err();
        assert_eq!(
            err,
            MemoryError::DimensionMismatch {
                what: "question",
                expected: 3,
                found: 4
            }
        );
        assert!(mem.store(&BitVector::zeros(3), &BitVector::zeros(3)).is_err());
        assert!(mem.potentials(&BitVector::zeros(4)).is_err());
        assert!(mem.retrieve(&BitVector::zeros(2)).is_err());
    }

    #[test]
    fn empty_cue_and_fresh_memory_retrieve_nothing() {
        let mut mem = WillshawMemory::auto(70);
        let fresh = mem.retrieve(&BitVector::from_active(70, vec![3, 66]).unwrap()).unwrap();
        assert!(fresh.output.is_zero());
        assert_eq!(fresh.max_potential, 0);
        mem.store_auto(&BitVector::from_active(70, vec![1, 5, 65]).unwrap()).unwrap();
        let r = mem.retrieve(&BitVector::zeros(70)).unwrap();
        assert!(r.output.is_zero());
        assert_eq!(mem.potentials(&BitVector::zeros(70)).unwrap(), vec![0; 70]);
    }

    #[test]
    fn heteroassociative_store_and_recall() {
        let mut mem = WillshawMemory::new(4, 3);
        mem.store(&bv(&[1, 1, 0, 0]), &bv(&[0, 0, 1])).unwrap();
        mem.store(&bv(&[0, 0, 1, 1]), &bv(&[1, 0, 0])).unwrap();
        assert_eq!(mem.retrieve(&bv(&[1, 0, 0, 0])).unwrap().output, bv(&[0, 0, 1]));
        assert_eq!(mem.retrieve(&bv(&[0, 0, 1, 1])).unwrap().output, bv(&[1, 0, 0]));
    }

    #[test]
    fn summary_statistics() {
        let mut mem = WillshawMemory::auto(4);
        mem.store_auto(&bv(&[1, 1, 0, 0])).unwrap();
        mem.store_auto(&bv(&[0, 1, 1, 0])).unwrap();
        // potentials for cue {1}: column sums of row 1 = (1,1,1,0)
        let r = mem.retrieve(&bv(&[0, 1, 0, 0])).unwrap();
        assert_eq!(r.potentials.min, 0);
        assert_eq!(r.potentials.max, 1);
        assert!((r.potentials.mean - 0.75).abs() < 1e-12);
        assert_eq!(r.output, bv(&[1, 1, 1, 0]));
    }

    #[test]
    fn batch_equals_incremental() {
        let patterns: Vec<BitVector> = (0..1500)
            .map(|k| {
                BitVector::from_unsorted(200, vec![k % 200, (k * 7 + 3) % 200, (k * 13 + 11) % 200])
                    .unwrap()
            })
            .collect();
        let mut inc = WillshawMemory::auto(200);
        for p in &patterns {
            inc.store_auto(p).unwrap();
        }
        let mut batch = WillshawMemory::auto(200);
        batch.store_batch(&patterns).unwrap();
        assert_eq!(inc, batch);
        assert_eq!(batch.stored_count(), 1500);
    }
}
