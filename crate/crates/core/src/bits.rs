//! Packed bit rows.
//!
//! [`BitRow`] is the unit of data everywhere in the simulator: one DRAM row,
//! one bitvector segment, one TMR payload. Bit `i` lives in word `i / 64` at
//! position `i % 64`. Bits past `len` in the last word are always zero.

use std::fmt;
use std::ops::{BitAnd, BitOr, BitXor, Not};

use rand::Rng;

pub(crate) const WORD_BITS: usize = 64;

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// Mask of the valid bits in the last word of a `len`-bit row.
pub(crate) fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => !0,
        r => (1u64 << r) - 1,
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut row = Self {
            len,
            words: vec![!0; words_for(len)],
        };
        row.clear_tail();
        row
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut row = Self::zeros(len);
        for i in 0..len {
            if f(i) {
                row.set(i, true);
            }
        }
        row
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_fn(bits.len(), |i| bits[i])
    }

    /// Builds a row from raw words; bits past `len` are discarded.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut row = Self { len, words };
        row.clear_tail();
        row
    }

    /// Little-endian bit order within each byte: bit `i` is byte `i / 8`, bit `i % 8`.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        let mut words = vec![0u64; words_for(bytes.len() * 8)];
        for (i, chunk) in bytes.chunks(8).enumerate() {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            words[i] = u64::from_le_bytes(buf);
        }
        Self {
            len: bytes.len() * 8,
            words,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.len.div_ceil(8));
        out
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let words = (0..words_for(len)).map(|_| rng.random::<u64>()).collect();
        Self::from_words(len, words)
    }

    /// Each bit set independently with probability `p`.
    pub fn random_with_density<R: Rng + ?Sized>(len: usize, p: f64, rng: &mut R) -> Self {
        Self::from_fn(len, |_| rng.random_bool(p))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for row of {} bits", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for row of {} bits", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn all_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn all_one(&self) -> bool {
        *self == Self::ones(self.len)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD_BITS + bit)
            })
        })
    }

    /// Copies `src` into this row starting at bit `offset`.
    pub fn splice(&mut self, offset: usize, src: &BitRow) {
        assert!(offset + src.len <= self.len, "splice past end of row");
        for i in 0..src.len {
            self.set(offset + i, src.get(i));
        }
    }

    /// The `len`-bit window starting at `offset`.
    pub fn slice(&self, offset: usize, len: usize) -> BitRow {
        assert!(offset + len <= self.len, "slice past end of row");
        BitRow::from_fn(len, |i| self.get(offset + i))
    }

    /// Grows or truncates to `len` bits; new bits are zero.
    pub fn resized(&self, len: usize) -> BitRow {
        BitRow::from_words(len, self.words.clone())
    }

    fn clear_tail(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.len);
        }
    }

    fn zip_with(&self, other: &BitRow, f: impl Fn(u64, u64) -> u64) -> BitRow {
        assert_eq!(self.len, other.len, "bit rows differ in length");
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| f(a, b))
            .collect();
        BitRow::from_words(self.len, words)
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const SHOWN: usize = 64;
        write!(f, "BitRow[{}; ", self.len)?;
        for i in 0..self.len.min(SHOWN) {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        if self.len > SHOWN {
            write!(f, "... ones={}", self.count_ones())?;
        }
        f.write_str("]")
    }
}

impl Not for &BitRow {
    type Output = BitRow;
    fn not(self) -> BitRow {
        BitRow::from_words(self.len, self.words.iter().map(|w| !w).collect())
    }
}

impl BitAnd for &BitRow {
    type Output = BitRow;
    fn bitand(self, rhs: &BitRow) -> BitRow {
        self.zip_with(rhs, |a, b| a & b)
    }
}

impl BitOr for &BitRow {
    type Output = BitRow;
    fn bitor(self, rhs: &BitRow) -> BitRow {
        self.zip_with(rhs, |a, b| a | b)
    }
}

impl BitXor for &BitRow {
    type Output = BitRow;
    fn bitxor(self, rhs: &BitRow) -> BitRow {
        self.zip_with(rhs, |a, b| a ^ b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tail_stays_clear() {
        let row = BitRow::ones(70);
        assert_eq!(row.count_ones(), 70);
        assert_eq!((!&BitRow::zeros(70)).count_ones(), 70);
    }

    #[test]
    fn bytes_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let row = BitRow::random(200, &mut rng);
        assert_eq!(BitRow::from_bytes(&row.to_bytes()), row);
        let b = BitRow::from_bytes(&[0b0000_0101]);
        assert!(b.get(0) && !b.get(1) && b.get(2));
    }

    #[test]
    fn iter_ones_matches_get() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let row = BitRow::random(333, &mut rng);
        let expect: Vec<usize> = (0..333).filter(|&i| row.get(i)).collect();
        assert_eq!(row.iter_ones().collect::<Vec<_>>(), expect);
    }

    #[test]
    fn splice_and_slice() {
        let mut row = BitRow::zeros(130);
        row.splice(60, &BitRow::ones(10));
        assert_eq!(row.iter_ones().collect::<Vec<_>>(), (60..70).collect::<Vec<_>>());
        assert!(row.slice(60, 10).all_one());
    }
}
