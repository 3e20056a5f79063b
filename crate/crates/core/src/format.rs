//! Errors shared by the binary artifact formats (`WAM1` memories, `WDC1`
//! dictionaries).

use std::io::{self, Read};

use thiserror::Error;

#[derive(Error, Debug)]
pub enum FormatError {
    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),

    #[error("invalid dimensions {m}x{n}")]
    InvalidDimensions { m: u64, n: u64 },

    #[error("truncated {section}: expected {expected} bytes, got {found}")]
    Truncated {
        section: &'static str,
        expected: u64,
        found: u64,
    },

    #[error("non-zero padding bits after the last matrix entry")]
    NonZeroPadding,

    #[error("invalid value in {0}")]
    InvalidValue(&'static str),

    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads exactly `len` bytes or reports how many were available.
pub(crate) fn read_section<R: Read>(
    r: &mut R,
    len: u64,
    section: &'static str,
) -> Result<Vec<u8>, FormatError> {
    let mut buf = Vec::new();
    r.take(len).read_to_end(&mut buf)?;
    if (buf.len() as u64) < len {
        return Err(FormatError::Truncated {
            section,
            expected: len,
            found: buf.len() as u64,
        });
    }
    Ok(buf)
}
