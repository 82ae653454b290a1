//! Fixed-length bit masks describing subsets `V ⊆ W` of a base set.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    len: usize,
    words: Vec<u64>,
}

impl Mask {
    pub fn empty(len: usize) -> Self {
        Mask { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn full(len: usize) -> Self {
        let mut mask = Mask { len, words: vec![u64::MAX; len.div_ceil(64)] };
        mask.clear_tail();
        mask
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut mask = Mask::empty(len);
        for i in indices {
            mask.set(i, true);
        }
        mask
    }

    /// Each bit set independently with probability `alpha`.
    ///
    /// Dyadic `alpha` (at most 32 binary digits) is sampled 64 bits at a time
    /// by the bitwise comparator trick; other values fall back to one
    /// Bernoulli draw per bit. Both are exact.
    pub fn bernoulli<R: Rng + ?Sized>(len: usize, alpha: f64, rng: &mut R) -> Self {
        let mut mask = Mask::empty(len);
        match dyadic_digits(alpha) {
            Some(digits) => {
                for word in &mut mask.words {
                    *word = bernoulli_word(&digits, rng);
                }
                mask.clear_tail();
            }
            None => {
                for i in 0..len {
                    if rng.gen_bool(alpha) {
                        mask.set(i, true);
                    }
                }
            }
        }
        mask
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "mask index {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "mask index {i} out of range {}", self.len);
        let bit = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, other: &Mask) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Smallest index whose bit is clear.
    pub fn first_zero(&self) -> Option<usize> {
        self.words.iter().enumerate().find_map(|(k, &w)| {
            let i = k * 64 + (!w).trailing_zeros() as usize;
            (w != u64::MAX && i < self.len).then_some(i)
        })
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(k * 64 + bit)
            })
        })
    }

    /// Little-endian hex of the packed words, 16 digits per word.
    pub fn to_hex(&self) -> String {
        let bytes: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        hex::encode(bytes)
    }

    pub fn from_hex(len: usize, s: &str) -> Result<Self> {
        let bytes = hex::decode(s).map_err(|e| invalid(format!("bad mask hex: {e}")))?;
        let n_words = len.div_ceil(64);
        if bytes.len() != n_words * 8 {
            return Err(invalid(format!(
                "mask hex has {} bytes, expected {} for length {len}",
                bytes.len(),
                n_words * 8
            )));
        }
        let words: Vec<u64> =
            bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect();
        let mask = Mask { len, words };
        let mut trimmed = mask.clone();
        trimmed.clear_tail();
        if trimmed != mask {
            return Err(invalid("mask hex sets bits beyond its length"));
        }
        Ok(mask)
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

impl fmt::Debug for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mask({}; {})", self.len, self.to_hex())
    }
}

#[derive(Serialize, Deserialize)]
struct MaskRepr {
    len: usize,
    hex: String,
}

impl Serialize for Mask {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MaskRepr { len: self.len, hex: self.to_hex() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mask {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MaskRepr::deserialize(d)?;
        Mask::from_hex(repr.len, &repr.hex).map_err(serde::de::Error::custom)
    }
}

/// Binary digits of `alpha` (most significant first) if it is a dyadic
/// rational in (0, 1) with at most 32 digits.
fn dyadic_digits(alpha: f64) -> Option<Vec<bool>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return None;
    }
    let scaled = alpha * (1u64 << 32) as f64;
    if scaled.fract() != 0.0 {
        return None;
    }
    let n = scaled as u64;
    let width = 32 - n.trailing_zeros() as usize;
    Some((0..width).map(|k| (n >> (31 - k)) & 1 == 1).collect())
}

/// 64 independent Bernoulli(0.b₁b₂…b_w) bits: compare a uniform binary
/// fraction against the digits, least significant digit first.
fn bernoulli_word<R: Rng + ?Sized>(digits: &[bool], rng: &mut R) -> u64 {
    let mut acc = 0u64;
    for &bit in digits.iter().rev() {
        let r: u64 = rng.gen();
        acc = if bit { r | acc } else { r & acc };
    }
    acc
}
