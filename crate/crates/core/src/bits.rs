//! Sparse binary patterns.
//!
//! A [`BitVector`] stores only the positions of its active bits, sorted and
//! unique, together with the total pattern length. This is the currency that
//! flows between encoders, the memory and the decoders.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum BitError {
    #[error("bit position {position} out of range for length {len}")]
    OutOfRange { position: usize, len: usize },

    #[error("active positions must be strictly increasing (found {prev} then {next})")]
    Unsorted { prev: usize, next: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("range {start}..{end} exceeds length {len}")]
    BadRange { start: usize, end: usize, len: usize },
}

/// Fixed-length binary pattern kept as its sorted set of active positions.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    active: Vec<usize>,
}

impl BitVector {
    /// All-zero pattern of the given length.
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            active: Vec::new(),
        }
    }

    /// Builds a pattern from strictly increasing active positions.
    pub fn from_active(len: usize, active: Vec<usize>) -> Result<Self, BitError> {
        for w in active.windows(2) {
            if w[0] >= w[1] {
                return Err(BitError::Unsorted {
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        if let Some(&last) = active.last() {
            if last >= len {
                return Err(BitError::OutOfRange {
                    position: last,
                    len,
                });
            }
        }
        Ok(Self { len, active })
    }

    /// Builds a pattern from arbitrary positions; duplicates collapse.
    pub fn from_unsorted(len: usize, mut active: Vec<usize>) -> Result<Self, BitError> {
        active.sort_unstable();
        active.dedup();
        Self::from_active(len, active)
    }

    /// Builds a pattern from a 0/1 (or false/true) slice.
    pub fn from_bools<B: Copy + Into<bool>>(bits: &[B]) -> Self {
        let active = bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.into().then_some(i))
            .collect();
        Self {
            len: bits.len(),
            active,
        }
    }

    /// Convenience for tests and examples: `&[0, 1, 1, 0]`.
    pub fn from_01(bits: &[u8]) -> Self {
        let active = bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b != 0).then_some(i))
            .collect();
        Self {
            len: bits.len(),
            active,
        }
    }

    /// Packs little-endian 64-bit words (bit 0 of word 0 is position 0).
    pub fn from_words(len: usize, words: &[u64]) -> Self {
        let mut active = Vec::new();
        for (w, &word) in words.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let pos = w * 64 + word.trailing_zeros() as usize;
                if pos >= len {
                    break;
                }
                active.push(pos);
                word &= word - 1;
            }
        }
        Self { len, active }
    }

    /// Number of bit positions (not the popcount; see [`count_ones`](Self::count_ones)).
    #[inline]
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len
    }

    /// Number of active bits.
    #[inline]
    pub fn count_ones(&self) -> usize {
        self.active.len()
    }

    /// True when no bit is active (the length may still be non-zero).
    #[inline]
    pub fn is_zero(&self) -> bool {
        self.active.is_empty()
    }

    #[inline]
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.active.iter().copied()
    }

    pub fn get(&self, position: usize) -> bool {
        self.active.binary_search(&position).is_ok()
    }

    pub fn to_words(&self) -> Vec<u64> {
        let mut words = vec![0u64; self.len.div_ceil(64)];
        for &p in &self.active {
            words[p / 64] |= 1u64 << (p % 64);
        }
        words
    }

    pub fn to_bools(&self) -> Vec<bool> {
        let mut out = vec![false; self.len];
        for &p in &self.active {
            out[p] = true;
        }
        out
    }

    /// Every active bit of `self` is active in `other`.
    pub fn is_subset_of(&self, other: &BitVector) -> bool {
        if self.len != other.len {
            return false;
        }
        let mut theirs = other.active.iter().peekable();
        'outer: for &p in &self.active {
            while let Some(&&q) = theirs.peek() {
                theirs.next();
                if q == p {
                    continue 'outer;
                }
                if q > p {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn union(&self, other: &BitVector) -> Result<BitVector, BitError> {
        if self.len != other.len {
            return Err(BitError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        let mut active = Vec::with_capacity(self.active.len() + other.active.len());
        let (mut a, mut b) = (self.active.iter().peekable(), other.active.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x <= y {
                        active.push(x);
                        a.next();
                        if x == y {
                            b.next();
                        }
                    } else {
                        active.push(y);
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    active.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    active.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Ok(BitVector {
            len: self.len,
            active,
        })
    }

    /// Number of positions active in both patterns.
    pub fn overlap(&self, other: &BitVector) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.active.len() && j < other.active.len() {
            match self.active[i].cmp(&other.active[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// The sub-pattern covering `range`, re-indexed from zero.
    pub fn slice(&self, range: Range<usize>) -> Result<BitVector, BitError> {
        if range.start > range.end || range.end > self.len {
            return Err(BitError::BadRange {
                start: range.start,
                end: range.end,
                len: self.len,
            });
        }
        let lo = self.active.partition_point(|&p| p < range.start);
        let hi = self.active.partition_point(|&p| p < range.end);
        Ok(BitVector {
            len: range.end - range.start,
            active: self.active[lo..hi].iter().map(|p| p - range.start).collect(),
        })
    }

    /// Concatenates patterns end to end.
    pub fn concat<'a, I>(parts: I) -> BitVector
    where
        I: IntoIterator<Item = &'a BitVector>,
    {
        let mut len = 0;
        let mut active = Vec::new();
        for part in parts {
            active.extend(part.active.iter().map(|p| p + len));
            len += part.len;
        }
        BitVector { len, active }
    }

    /// Keeps only the active positions accepted by `keep`, in order.
    pub(crate) fn retain<F: FnMut(usize) -> bool>(&self, mut keep: F) -> BitVector {
        BitVector {
            len: self.len,
            active: self.active.iter().copied().filter(|&p| keep(p)).collect(),
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            let s: String = self
                .to_bools()
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect();
            write!(f, "BitVector({s})")
        } else {
            write!(
                f,
                "BitVector(len={}, ones={}, active={:?})",
                self.len,
                self.active.len(),
                self.active
            )
        }
    }
}
