//! Bit-sliced (vertical) counters.
//!
//! Dendritic potentials are sums of up to `|cue|` weight rows. Instead of one
//! integer per column, the counts are kept as binary digit planes: plane `p`
//! holds bit `p` of every column's count, 64 columns per word. Adding a row is
//! a ripple-carry over the planes, and the arg-max set is found by walking the
//! planes from the most significant digit down, so the soft threshold never
//! materialises the per-column integers.

pub(crate) struct SlicedCounts {
    words: usize,
    planes: usize,
    /// word-major: `data[w * planes + p]`
    data: Vec<u64>,
}

/// Number of binary digits needed to count up to `max`.
fn digits_for(max: usize) -> usize {
    (usize::BITS - max.leading_zeros()) as usize
}

impl SlicedCounts {
    /// Sums the selected rows of a row-major bit matrix.
    pub(crate) fn accumulate(weights: &[u64], words_per_row: usize, rows: &[usize]) -> Self {
        let planes = digits_for(rows.len());
        let mut data = vec![0u64; words_per_row * planes];
        if planes == 0 {
            return Self {
                words: words_per_row,
                planes,
                data,
            };
        }
        for w in 0..words_per_row {
            let counter = &mut data[w * planes..(w + 1) * planes];
            for &r in rows {
                let mut carry = weights[r * words_per_row + w];
                let mut p = 0;
                while carry != 0 {
                    let next = counter[p] & carry;
                    counter[p] ^= carry;
                    carry = next;
                    p += 1;
                }
            }
        }
        Self {
            words: words_per_row,
            planes,
            data,
        }
    }

    #[inline]
    fn plane(&self, w: usize, p: usize) -> u64 {
        self.data[w * self.planes + p]
    }

    /// Count held by column `col`.
    pub(crate) fn value(&self, col: usize) -> u32 {
        let (w, b) = (col / 64, col % 64);
        (0..self.planes).fold(0u32, |acc, p| acc | ((((self.plane(w, p) >> b) & 1) as u32) << p))
    }

    /// Maximum count over the valid columns and the mask of columns reaching it.
    pub(crate) fn max_mask(&self, valid: &[u64]) -> (u32, Vec<u64>) {
        let mut cand = valid.to_vec();
        let mut max = 0u32;
        for p in (0..self.planes).rev() {
            let any = (0..self.words).fold(0u64, |acc, w| acc | (cand[w] & self.plane(w, p)));
            if any != 0 {
                for (w, c) in cand.iter_mut().enumerate() {
                    *c &= self.plane(w, p);
                }
                max |= 1 << p;
            }
        }
        (max, cand)
    }

    /// Minimum count over the valid columns.
    pub(crate) fn min(&self, valid: &[u64]) -> u32 {
        let mut cand = valid.to_vec();
        let mut min = 0u32;
        for p in (0..self.planes).rev() {
            let any = (0..self.words).fold(0u64, |acc, w| acc | (cand[w] & !self.plane(w, p)));
            if any != 0 {
                for (w, c) in cand.iter_mut().enumerate() {
                    *c &= !self.plane(w, p);
                }
            } else {
                min |= 1 << p;
            }
        }
        min
    }
}
