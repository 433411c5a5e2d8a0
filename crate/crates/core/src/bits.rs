//! Fixed-width bitstrings used both as classical codewords and as sparse
//! basis labels.
//!
//! Qubit indexing is 1-based and big-endian: qubit 1 is the leftmost
//! character of the text form and the most significant bit of `value`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Widest register a basis label can address.
pub const MAX_WIDTH: usize = 128;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct BitString {
    len: usize,
    value: u128,
}

impl BitString {
    pub fn new(len: usize, value: u128) -> Result<Self> {
        if len > MAX_WIDTH {
            return Err(Error::ResourceLimit(format!(
                "bitstring of {len} bits exceeds {MAX_WIDTH}"
            )));
        }
        if len < MAX_WIDTH && value >> len != 0 {
            return Err(Error::InvalidBitString(format!(
                "value {value:#x} does not fit {len} bits"
            )));
        }
        Ok(Self { len, value })
    }

    pub fn empty() -> Self {
        Self { len: 0, value: 0 }
    }

    pub fn zeros(len: usize) -> Self {
        Self { len, value: 0 }
    }

    pub fn from_bools(bits: &[bool]) -> Result<Self> {
        let value = bits.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128);
        Self::new(bits.len(), value)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> u128 {
        self.value
    }

    /// Bit at 1-based position `k`.
    pub fn get(&self, k: usize) -> bool {
        assert!(k >= 1 && k <= self.len, "bit index {k} out of range");
        (self.value >> (self.len - k)) & 1 == 1
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (1..=self.len).map(|k| self.get(k)).collect()
    }

    /// The first `k` bits.
    pub fn prefix(&self, k: usize) -> BitString {
        assert!(k <= self.len);
        let value = if k == 0 { 0 } else { self.value >> (self.len - k) };
        BitString { len: k, value }
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len <= other.len && other.prefix(self.len) == *self
    }

    pub fn concat(&self, other: &BitString) -> Result<BitString> {
        let len = self.len + other.len;
        if len > MAX_WIDTH {
            return Err(Error::ResourceLimit(format!(
                "concatenation of {len} bits exceeds {MAX_WIDTH}"
            )));
        }
        let value = if other.len == MAX_WIDTH {
            other.value
        } else {
            (self.value << other.len) | other.value
        };
        Ok(BitString { len, value })
    }

    /// Right-pad with zeros up to `width` bits (the zero-extended form).
    pub fn zero_extend(&self, width: usize) -> Result<BitString> {
        if width < self.len {
            return Err(Error::LengthOverflow {
                length: self.len,
                l_max: width,
            });
        }
        self.concat(&BitString::zeros(width - self.len))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 1..=self.len {
            f.write_str(if self.get(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidBitString(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bools(&bits)
    }
}

/// Mask with the low `n` bits set.
pub(crate) fn low_mask(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}
