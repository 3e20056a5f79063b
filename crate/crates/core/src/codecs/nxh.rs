//! Noisy X-Hot label codes.
//!
//! A label `l` out of `L` classes owns the interval `[l·X, (l+1)·X)` of an
//! `L·X` bit code. Bits inside the interval fire with probability `p_class`,
//! bits outside with `p_rest`. Two encodings of the same label differ, so the
//! code also acts as a per-pattern description.

use rand::Rng;

use super::CodecError;
use crate::bits::BitVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NxhConfig {
    pub classes: usize,
    pub bits_per_class: usize,
    pub p_class: f64,
    pub p_rest: f64,
}

impl Default for NxhConfig {
    fn default() -> Self {
        Self {
            classes: 10,
            bits_per_class: 500,
            p_class: 0.5,
            p_rest: 0.0,
        }
    }
}

/// Result of decoding a label code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NxhDecoded {
    pub label: usize,
    /// Active bits inside the winning interval.
    pub votes: usize,
    /// Active bits in the whole code.
    pub total: usize,
}

impl NxhDecoded {
    /// `votes / total`, or `None` for an all-zero code.
    pub fn confidence(&self) -> Option<f64> {
        (self.total > 0).then(|| self.votes as f64 / self.total as f64)
    }

    pub fn is_zero_confidence(&self) -> bool {
        self.total == 0
    }
}

impl NxhConfig {
    pub fn code_len(&self) -> usize {
        self.classes * self.bits_per_class
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        let bad = |msg: &str| Err(CodecError::InvalidConfig(format!("nxh: {msg}")));
        if self.classes == 0 || self.bits_per_class == 0 {
            return bad("classes and bits_per_class must be positive");
        }
        if !(0.0..=1.0).contains(&self.p_class) || !(0.0..=1.0).contains(&self.p_rest) {
            return bad("probabilities must lie in [0, 1]");
        }
        if self.p_class <= self.p_rest {
            return bad("p_class must exceed p_rest");
        }
        Ok(())
    }

    /// The deterministic X-hot limit of this code (`p_class = 1`, `p_rest = 0`).
    pub fn x_hot(&self) -> Self {
        Self {
            p_class: 1.0,
            p_rest: 0.0,
            ..*self
        }
    }

    pub fn encode<R: Rng + ?Sized>(&self, label: usize, rng: &mut R) -> Result<BitVector, CodecError> {
        if label >= self.classes {
            return Err(CodecError::LabelOutOfRange {
                label,
                classes: self.classes,
            });
        }
        let x = self.bits_per_class;
        let own = label * x..(label + 1) * x;
        let active = (0..self.code_len())
            .filter(|i| {
                let p = if own.contains(i) { self.p_class } else { self.p_rest };
                rng.random_bool(p)
            })
            .collect();
        Ok(BitVector::from_active(self.code_len(), active).expect("ascending in range"))
    }

    /// Arg-max of the per-interval popcounts; ties go to the lowest label.
    pub fn decode(&self, code: &BitVector) -> Result<NxhDecoded, CodecError> {
        if code.len() != self.code_len() {
            return Err(CodecError::LengthMismatch {
                expected: self.code_len(),
                found: code.len(),
            });
        }
        let mut votes = vec![0usize; self.classes];
        for p in code.iter() {
            votes[p / self.bits_per_class] += 1;
        }
        let (label, &best) = votes
            .iter()
            .enumerate()
            .fold((0, &votes[0]), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        Ok(NxhDecoded {
            label,
            votes: best,
            total: code.count_ones(),
        })
    }
}
