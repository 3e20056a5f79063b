//! `WAM1` serialization.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "WAM1" | version: u32 = 1 | m: u64 | n: u64 | stored_count: u64
//! | ceil(m*n / 8) payload bytes
//! ```
//!
//! The payload is the matrix as one row-major bit stream: entry `(i, j)` is
//! bit `k = i*n + j`, stored in byte `k / 8` at bit `k % 8` (LSB first). Pad
//! bits after the last entry are zero.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::WillshawMemory;
use crate::format::{read_section, FormatError};

pub const MAGIC: [u8; 4] = *b"WAM1";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 8;

impl WillshawMemory {
    /// Size of the serialized matrix payload in bytes.
    pub fn payload_len(&self) -> usize {
        (self.m * self.n).div_ceil(8)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), FormatError> {
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.m as u64).to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&self.stored.to_le_bytes())?;

        let mut payload = vec![0u8; self.payload_len()];
        for i in 0..self.m {
            for (wi, &word) in self.row_words(i).iter().enumerate() {
                let mut word = word;
                while word != 0 {
                    let j = wi * 64 + word.trailing_zeros() as usize;
                    let k = i * self.n + j;
                    payload[k / 8] |= 1 << (k % 8);
                    word &= word - 1;
                }
            }
        }
        w.write_all(&payload)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, FormatError> {
        let header = read_section(&mut r, HEADER_LEN as u64, "header")?;
        let magic: [u8; 4] = header[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(FormatError::BadMagic(magic));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let m = u64::from_le_bytes(header[8..16].try_into().unwrap());
        let n = u64::from_le_bytes(header[16..24].try_into().unwrap());
        let stored = u64::from_le_bytes(header[24..32].try_into().unwrap());
        let cells = m.checked_mul(n).filter(|_| m > 0 && n > 0);
        let Some(cells) = cells.filter(|&c| usize::try_from(c).is_ok()) else {
            return Err(FormatError::InvalidDimensions { m, n });
        };

        let payload = read_section(&mut r, cells.div_ceil(8), "payload")?;
        let tail = cells % 8;
        if tail != 0 && payload[payload.len() - 1] >> tail != 0 {
            return Err(FormatError::NonZeroPadding);
        }

        let (m, n) = (m as usize, n as usize);
        let mut mem = WillshawMemory::new(m, n);
        mem.stored = stored;
        for (b, &byte) in payload.iter().enumerate() {
            let mut byte = byte;
            while byte != 0 {
                let k = b * 8 + byte.trailing_zeros() as usize;
                let (i, j) = (k / n, k % n);
                mem.weights[i * mem.words_per_row + j / 64] |= 1 << (j % 64);
                byte &= byte - 1;
            }
        }
        Ok(mem)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FormatError> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FormatError> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVector;

    fn bytes(mem: &WillshawMemory) -> Vec<u8> {
        let mut out = Vec::new();
        mem.write_to(&mut out).unwrap();
        out
    }

    #[test]
    fn fresh_8x8_layout() {
        let out = bytes(&WillshawMemory::auto(8));
        assert_eq!(out.len(), HEADER_LEN + 8);
        assert_eq!(&out[0..4], b"WAM1");
        assert_eq!(&out[4..8], &[1, 0, 0, 0]);
        assert_eq!(&out[8..16], &8u64.to_le_bytes());
        assert_eq!(&out[16..24], &8u64.to_le_bytes());
        assert_eq!(&out[24..32], &0u64.to_le_bytes());
        assert!(out[HEADER_LEN..].iter().all(|&b| b == 0));
    }

    #[test]
    fn bit_order_is_row_major_lsb_first() {
        // 3x3: entry (1,1) is bit 4 -> byte 0, 0x10; entry (2,2) is bit 8 -> byte 1, 0x01
        let mut mem = WillshawMemory::auto(3);
        mem.store_auto(&BitVector::from_01(&[0, 1, 0])).unwrap();
        mem.store_auto(&BitVector::from_01(&[0, 0, 1])).unwrap();
        let out = bytes(&mem);
        assert_eq!(&out[HEADER_LEN..], &[0x10, 0x01]);
        assert_eq!(&out[24..32], &2u64.to_le_bytes());
    }

    #[test]
    fn round_trip() {
        let mut mem = WillshawMemory::new(5, 67);
        mem.store(
            &BitVector::from_active(5, vec![0, 4]).unwrap(),
            &BitVector::from_active(67, vec![1, 63, 64, 66]).unwrap(),
        )
        .unwrap();
        let back = WillshawMemory::read_from(&bytes(&mem)[..]).unwrap();
        assert_eq!(back, mem);
        assert_eq!(back.stored_count(), 1);
    }

    #[test]
    fn distinct_errors() {
        let good = bytes(&WillshawMemory::auto(3));

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(
            WillshawMemory::read_from(&bad[..]),
            Err(FormatError::BadMagic(_))
        ));

        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(
            WillshawMemory::read_from(&bad[..]),
            Err(FormatError::UnsupportedVersion(2))
        ));

        assert!(matches!(
            WillshawMemory::read_from(&good[..20]),
            Err(FormatError::Truncated {
                section: "header",
                ..
            })
        ));
        assert!(matches!(
            WillshawMemory::read_from(&good[..HEADER_LEN + 1]),
            Err(FormatError::Truncated {
                section: "payload",
                expected: 2,
                found: 1
            })
        ));

        let mut bad = good.clone();
        *bad.last_mut().unwrap() = 0x02; // bit 9 of a 9-entry matrix
        assert!(matches!(
            WillshawMemory::read_from(&bad[..]),
            Err(FormatError::NonZeroPadding)
        ));

        let mut bad = good;
        bad[8..16].copy_from_slice(&0u64.to_le_bytes());
        assert!(matches!(
            WillshawMemory::read_from(&bad[..]),
            Err(FormatError::InvalidDimensions { m: 0, n: 3 })
        ));
    }
}
