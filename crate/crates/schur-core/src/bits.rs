//! Fixed-length bitstrings on up to 128 wires.
//!
//! Wire 0 holds the leftmost character of the ASCII form, so `"011"` has
//! wire 0 clear and wires 1, 2 set. In spin terms a 0-bit is spin up
//! (m = +1/2) and a 1-bit is spin down (m = −1/2); this is the one global
//! bit convention used by every amplitude and sampler in the crate.

use std::fmt;

use crate::error::{Error, Result};

pub const MAX_WIRES: usize = 128;

/// A computational-basis bitstring.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: u128,
    len: u16,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_WIRES, "bitstring length {len} exceeds {MAX_WIRES}");
        BitString { bits: 0, len: len as u16 }
    }

    /// Builds from the integer whose bit `i` is wire `i`.
    pub fn from_index(index: u128, len: usize) -> Self {
        assert!(len <= MAX_WIRES);
        let mask = if len == MAX_WIRES { u128::MAX } else { (1u128 << len) - 1 };
        BitString { bits: index & mask, len: len as u16 }
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s.len() > MAX_WIRES {
            return Err(Error::TooLarge { what: "bitstring length", value: s.len(), limit: MAX_WIRES });
        }
        let mut bits = 0u128;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(Error::BadParameter(format!("bitstring contains '{c}'"))),
            }
        }
        Ok(BitString { bits, len: s.len() as u16 })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.bits >> i) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len());
        if v {
            self.bits |= 1 << i;
        } else {
            self.bits &= !(1 << i);
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len());
        self.bits ^= 1 << i;
    }

    /// The integer whose bit `i` is wire `i`; indexes dense state vectors.
    #[inline]
    pub fn index(&self) -> u128 {
        self.bits
    }

    #[inline]
    pub fn index_usize(&self) -> usize {
        debug_assert!(self.len() < usize::BITS as usize);
        self.bits as usize
    }

    #[inline]
    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Total doubled azimuthal weight: +1 per 0-bit, −1 per 1-bit.
    #[inline]
    pub fn twice_weight(&self) -> i32 {
        self.len as i32 - 2 * self.bits.count_ones() as i32
    }

    /// `self` on wires `0..self.len()`, `other` appended after.
    pub fn concat(&self, other: &BitString) -> BitString {
        let len = self.len() + other.len();
        assert!(len <= MAX_WIRES);
        BitString { bits: self.bits | (other.bits << self.len), len: len as u16 }
    }

    /// Wires `start..start + len` as a new bitstring.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        debug_assert!(start + len <= self.len());
        BitString::from_index(self.bits >> start, len)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}
