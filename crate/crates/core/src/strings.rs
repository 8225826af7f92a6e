//! Bit-string primitives: XOR, zero/one index sets, balance, flips, basis
//! strings, and enumeration of balanced strings.
//!
//! Positions are 0-based throughout. Strings are packed into a single word,
//! so lengths are capped at 64, which is far beyond anything enumerable here.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub type Bit = u8;

pub const MAX_LEN: usize = 64;

/// A fixed-length sequence of bits. Position 0 is the leftmost character of
/// the textual encoding.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    // bit i of `bits` holds position i
    bits: u64,
}

impl BitString {
    pub fn zeros(len: usize) -> Result<Self> {
        if len > MAX_LEN {
            return Err(Error::TooLong { requested: len, max: MAX_LEN });
        }
        Ok(BitString { len, bits: 0 })
    }

    pub fn ones(len: usize) -> Result<Self> {
        let mut s = Self::zeros(len)?;
        if len > 0 {
            s.bits = u64::MAX >> (64 - len);
        }
        Ok(s)
    }

    pub fn from_bits<I: IntoIterator<Item = Bit>>(iter: I) -> Result<Self> {
        let mut len = 0usize;
        let mut bits = 0u64;
        for b in iter {
            if len >= MAX_LEN {
                return Err(Error::TooLong { requested: len + 1, max: MAX_LEN });
            }
            if b != 0 {
                bits |= 1 << len;
            }
            len += 1;
        }
        Ok(BitString { len, bits })
    }

    /// Interprets `value` as a length-`len` string with position 0 as the
    /// most significant bit, so numeric order on `value` is lexicographic
    /// order on the string. Used by the enumerators.
    fn from_msb_value(len: usize, value: u64) -> Self {
        let mut bits = 0u64;
        for i in 0..len {
            if value >> (len - 1 - i) & 1 == 1 {
                bits |= 1 << i;
            }
        }
        BitString { len, bits }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> Bit {
        debug_assert!(i < self.len);
        (self.bits >> i & 1) as Bit
    }

    pub fn iter(&self) -> impl Iterator<Item = Bit> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Entrywise XOR of two strings of equal length.
    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len != other.len {
            return Err(Error::LengthMismatch { left: self.len, right: other.len });
        }
        Ok(BitString { len: self.len, bits: self.bits ^ other.bits })
    }

    /// The positions at which the string takes the value `v`.
    pub fn sigma(&self, v: Bit) -> IndexSet {
        let indices = (0..self.len).filter(|&i| self.get(i) == v).collect();
        IndexSet { indices }
    }

    /// True iff the string has equally many zeros and ones.
    pub fn is_balanced(&self) -> bool {
        2 * self.count_ones() == self.len
    }

    /// The standard basis string: 1 at position `i`, 0 elsewhere.
    pub fn basis(len: usize, i: usize) -> Result<BitString> {
        if i >= len {
            return Err(Error::IndexOutOfRange { index: i, length: len });
        }
        let mut s = Self::zeros(len)?;
        s.bits = 1 << i;
        Ok(s)
    }

    /// Flips the bits at the given positions; an involution.
    pub fn flip_at(&self, positions: &IndexSet) -> Result<BitString> {
        let mut bits = self.bits;
        for &i in positions.iter() {
            if i >= self.len {
                return Err(Error::IndexOutOfRange { index: i, length: self.len });
            }
            bits ^= 1 << i;
        }
        Ok(BitString { len: self.len, bits })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                _ => return Err(Error::ParseBitString(s.to_string())),
            }
        }
        BitString::from_bits(bits)
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BitString {
    /// Lexicographic order on the textual encoding.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let common = self.len.min(other.len);
        for i in 0..common {
            match self.get(i).cmp(&other.get(i)) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.len.cmp(&other.len)
    }
}

/// A strictly increasing, duplicate-free set of 0-based positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        IndexSet { indices }
    }

    pub fn empty() -> Self {
        IndexSet { indices: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn get(&self, pos: usize) -> Option<usize> {
        self.indices.get(pos).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.indices.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        IndexSet::new(iter.into_iter().collect())
    }
}

/// All strings of the given length in lexicographic order.
pub fn enumerate_all(len: usize) -> Result<impl Iterator<Item = BitString>> {
    if len > 24 {
        return Err(Error::TooLong { requested: len, max: 24 });
    }
    Ok((0..1u64 << len).map(move |v| BitString::from_msb_value(len, v)))
}

/// All balanced strings of the given (even) length, lexicographically.
/// Odd lengths are rejected rather than yielding an empty stream.
pub fn enumerate_balanced(len: usize) -> Result<impl Iterator<Item = BitString>> {
    if len % 2 != 0 {
        return Err(Error::OddLength(len));
    }
    let half = (len / 2) as u32;
    Ok(enumerate_all(len)?.filter(move |s| s.count_ones() as u32 == half))
}
