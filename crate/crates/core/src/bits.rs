use std::fmt;

use crate::error::{Error, Result};

/// Packed bit string. Bit `i` lives in word `i / 64` at position `i % 64`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    /// Builds from a slice of 0/1 values; any other value is rejected.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut out = Self::with_capacity(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b > 1 {
                return Err(Error::Argument(format!("bit {i} has value {b}")));
            }
            out.push(b == 1);
        }
        Ok(out)
    }

    /// Parses a string of '0'/'1' characters.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = Self::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => return Err(Error::Argument(format!("invalid bit character {c:?}"))),
            }
        }
        Ok(out)
    }

    /// Hex payload, most significant bit of each nibble first ("6" -> 0110).
    pub fn from_hex(s: &str) -> Result<Self> {
        let mut out = Self::with_capacity(4 * s.len());
        for c in s.chars() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Error::Argument(format!("invalid hex digit {c:?}")))?;
            for shift in (0..4).rev() {
                out.push((v >> shift) & 1 == 1);
            }
        }
        Ok(out)
    }

    /// Little-endian packing: bit `i` is bit `i % 8` of byte `i / 8`.
    pub fn from_le_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() * 8 < len {
            return Err(Error::LengthMismatch {
                expected: len.div_ceil(8),
                actual: bytes.len(),
            });
        }
        let mut out = Self::zeros(len);
        for (i, chunk) in bytes.chunks(8).enumerate().take(out.words.len()) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            out.words[i] = u64::from_le_bytes(buf);
        }
        out.clear_tail();
        Ok(out)
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut bytes: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        bytes.truncate(self.len.div_ceil(8));
        bytes
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        let i = self.len - 1;
        if value {
            self.words[i / 64] |= 1u64 << (i % 64);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Zero-padded (or truncated) copy of length `len`.
    pub fn resized(&self, len: usize) -> Self {
        let mut out = Self::zeros(len);
        let n = out.words.len().min(self.words.len());
        out.words[..n].copy_from_slice(&self.words[..n]);
        out.clear_tail();
        out
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(BitString {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
            len: self.len,
        })
    }

    /// Cyclic rotation towards higher indices: `out[(i + k) mod len] = self[i]`.
    pub fn rotated(&self, k: usize) -> BitString {
        let mut out = BitString::zeros(self.len);
        if self.len == 0 {
            return out;
        }
        for i in 0..self.len {
            if self.get(i) {
                out.set((i + k) % self.len, true);
            }
        }
        out
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let iter = iter.into_iter();
        let mut out = BitString::with_capacity(iter.size_hint().0);
        for b in iter {
            out.push(b);
        }
        out
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({}; \"{}\")", self.len, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hex_is_msb_first_per_nibble() {
        assert_eq!(BitString::from_hex("6").unwrap().to_string(), "0110");
        assert_eq!(BitString::from_hex("a1").unwrap().to_string(), "10100001");
        assert!(BitString::from_hex("g").is_err());
    }

    #[test]
    fn le_packing_layout() {
        let b = BitString::parse("1000000001").unwrap();
        assert_eq!(b.to_le_bytes(), vec![0x01, 0x02]);
    }

    #[test]
    fn from_le_bytes_masks_tail() {
        let b = BitString::from_le_bytes(&[0xff], 3).unwrap();
        assert_eq!(b.to_string(), "111");
        assert_eq!(b.count_ones(), 3);
        assert!(BitString::from_le_bytes(&[0xff], 9).is_err());
    }

    #[test]
    fn rejects_non_binary() {
        assert!(BitString::from_bits(&[0, 1, 2]).is_err());
        assert!(BitString::parse("01x").is_err());
    }

    proptest! {
        #[test]
        fn le_bytes_roundtrip(bits in proptest::collection::vec(0u8..2, 0..300)) {
            let b = BitString::from_bits(&bits).unwrap();
            let back = BitString::from_le_bytes(&b.to_le_bytes(), b.len()).unwrap();
            prop_assert_eq!(b, back);
        }
    }
}
