//! Binary error-correcting codes `G: {±1}^k → {±1}^d` and the code-indexed
//! functions `g_j(x) = max{1 − r/(2d), max_{w ∈ W_j} ⟨w̄, x⟩}` with
//! `W_j = {G(z) : z_j = +1}`.
//!
//! GF(2) bit 0 maps to +1 and bit 1 to −1, so the all-zero codeword is the
//! all-(+1) vector and Hamming distance is the same in either picture.

mod bch;
pub mod gf;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::linalg::norm2;
use crate::packing::SignVector;

pub use bch::Bch;

/// Largest message length the enumeration oracle accepts.
pub const BRUTE_FORCE_MAX_K: usize = 16;

/// Named code constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodePreset {
    /// BCH `(15, 7)`, corrects 2 errors.
    Bch15_7,
    /// BCH `(127, 64)`, corrects 10 errors.
    Bch127_64,
}

impl CodePreset {
    pub fn build(self) -> BchCode {
        let (m, t) = match self {
            CodePreset::Bch15_7 => (4, 2),
            CodePreset::Bch127_64 => (7, 10),
        };
        BchCode::new(m, t).expect("preset parameters are valid")
    }
}

impl fmt::Display for CodePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CodePreset::Bch15_7 => "15-7",
            CodePreset::Bch127_64 => "127-64",
        })
    }
}

impl FromStr for CodePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "15-7" => Ok(CodePreset::Bch15_7),
            "127-64" => Ok(CodePreset::Bch127_64),
            other => Err(invalid(format!("unknown code preset '{other}' (expected 15-7 or 127-64)"))),
        }
    }
}

impl Serialize for CodePreset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CodePreset {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A `[d, k, r]` binary code with its bounded-distance decoder.
#[derive(Debug, Clone)]
pub struct BchCode {
    inner: Bch,
    decode_cost_note: String,
}

/// Serializable summary of a code, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub d: usize,
    pub k: usize,
    pub r: usize,
    pub field_order_exponent: u32,
    /// Generator polynomial, bit i = coefficient of x^i, as hex.
    pub generator: String,
    pub decode_cost_note: String,
}

/// Result of decoding `sgn(x)` and re-checking the candidate against `x`.
#[derive(Debug, Clone)]
struct Candidate {
    message: u128,
    codeword: u128,
    /// `⟨x, G(z)/√d⟩`
    inner: f64,
}

impl BchCode {
    /// Primitive narrow-sense BCH code over GF(2^m), correcting `t` errors.
    pub fn new(field_exponent: u32, t: usize) -> Result<Self> {
        let inner = Bch::new(field_exponent, t)
            .ok_or_else(|| invalid(format!("no BCH code for m = {field_exponent}, t = {t}")))?;
        let (n, k) = (inner.n(), inner.k());
        let decode_cost_note = format!(
            "encode: {} shift-xor steps; decode: syndromes {} field ops, Berlekamp-Massey O(t^2) = {}, \
             Chien search {} field ops, codeword re-check {} steps",
            k,
            2 * t * n,
            4 * t * t,
            n * (t + 1),
            k
        );
        Ok(BchCode { inner, decode_cost_note })
    }

    /// Codeword length `d`.
    pub fn d(&self) -> usize {
        self.inner.n()
    }

    /// Message length `k`.
    pub fn k(&self) -> usize {
        self.inner.k()
    }

    /// Correction radius `r`; the minimum distance is at least `2r + 1`.
    pub fn r(&self) -> usize {
        self.inner.t()
    }

    pub fn decode_cost_note(&self) -> &str {
        &self.decode_cost_note
    }

    pub fn params(&self) -> CodeParams {
        CodeParams {
            d: self.d(),
            k: self.k(),
            r: self.r(),
            field_order_exponent: self.inner.field_degree(),
            generator: format!("{:x}", self.inner.generator()),
            decode_cost_note: self.decode_cost_note.clone(),
        }
    }

    /// The floor value `1 − r/(2d)`.
    pub fn floor_value(&self) -> f64 {
        1.0 - self.r() as f64 / (2.0 * self.d() as f64)
    }

    pub fn encode(&self, z: &SignVector) -> Result<SignVector> {
        if z.dim() != self.k() {
            return Err(Error::LengthMismatch { expected: self.k(), got: z.dim() });
        }
        Ok(self.word_to_sign(self.inner.encode(sign_to_word(z))))
    }

    /// Bounded-distance decoding. `Ok(None)` means no codeword was found
    /// within distance `r`.
    pub fn decode(&self, y: &SignVector) -> Result<Option<SignVector>> {
        if y.dim() != self.d() {
            return Err(Error::LengthMismatch { expected: self.d(), got: y.dim() });
        }
        Ok(self.inner.correct(sign_to_word(y)).map(|cw| self.message_to_sign(self.inner.message_of(cw))))
    }

    pub(crate) fn word_to_sign(&self, word: u128) -> SignVector {
        word_to_sign(word, self.d())
    }

    pub(crate) fn message_to_sign(&self, message: u128) -> SignVector {
        word_to_sign(message, self.k())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d() {
            return Err(Error::LengthMismatch { expected: self.d(), got: x.len() });
        }
        let norm = norm2(x);
        if norm > 1.0 + 1e-9 {
            return Err(Error::DomainViolation { norm, radius: 1.0 });
        }
        Ok(())
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.k() {
            return Err(invalid(format!("code index {j} out of range for k = {}", self.k())));
        }
        Ok(())
    }

    /// `⟨x, w̄⟩` for the codeword `w` given as a bit pattern.
    fn normalized_inner(&self, x: &[f64], codeword: u128) -> f64 {
        let sum: f64 = x.iter().enumerate().map(|(i, &v)| if codeword >> i & 1 == 1 { -v } else { v }).sum();
        sum / (self.d() as f64).sqrt()
    }

    /// Decode `sgn(x)` (with `sgn(0) = +1`) and measure the decoded codeword
    /// against `x`. `None` when decoding fails.
    fn candidate(&self, x: &[f64]) -> Option<Candidate> {
        let signs = x.iter().enumerate().fold(0u128, |acc, (i, &v)| if v < 0.0 { acc | 1 << i } else { acc });
        let codeword = self.inner.correct(signs)?;
        Some(Candidate {
            message: self.inner.message_of(codeword),
            codeword,
            inner: self.normalized_inner(x, codeword),
        })
    }

    /// The codeword of `W_j` active at `x`, if `g_j(x)` exceeds the floor
    /// branch there; found with one decode.
    fn active_for(&self, j: usize, x: &[f64]) -> Option<Candidate> {
        self.candidate(x).filter(|c| c.message >> j & 1 == 0 && c.inner >= self.floor_value())
    }

    /// `g_j(x)` with a single decode of `sgn(x)`.
    pub fn gj_value_fast(&self, j: usize, x: &[f64]) -> Result<f64> {
        self.check_index(j)?;
        self.check_point(x)?;
        Ok(self.active_for(j, x).map_or(self.floor_value(), |c| c.inner))
    }

    /// A subgradient of `g_j` at `x`: `w̄` for the active codeword, else zero.
    pub fn gj_subgradient(&self, j: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.check_index(j)?;
        self.check_point(x)?;
        let mut g = vec![0.0; self.d()];
        if let Some(c) = self.active_for(j, x).filter(|c| c.inner > self.floor_value()) {
            let s = 1.0 / (self.d() as f64).sqrt();
            for (i, gi) in g.iter_mut().enumerate() {
                *gi = if c.codeword >> i & 1 == 1 { -s } else { s };
            }
        }
        Ok(g)
    }

    /// `g_j(x)` by enumerating all `2^{k−1}` codewords with `z_j = +1`.
    pub fn gj_value_bruteforce(&self, j: usize, x: &[f64]) -> Result<f64> {
        if self.k() > BRUTE_FORCE_MAX_K {
            return Err(Error::Unsupported(format!(
                "brute-force evaluation enumerates 2^(k-1) codewords; k = {} exceeds {BRUTE_FORCE_MAX_K}",
                self.k()
            )));
        }
        self.check_index(j)?;
        self.check_point(x)?;
        let best = (0..1u128 << self.k())
            .filter(|msg| msg >> j & 1 == 0)
            .map(|msg| self.normalized_inner(x, self.inner.encode(msg)))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(best.max(self.floor_value()))
    }

    /// `(g_1(x), …, g_k(x))` with one shared decode.
    pub fn all_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let floor = self.floor_value();
        let active = self.candidate(x).filter(|c| c.inner >= floor);
        Ok((0..self.k())
            .map(|j| match &active {
                Some(c) if c.message >> j & 1 == 0 => c.inner,
                _ => floor,
            })
            .collect())
    }

    /// `(1/k) Σ_j g_j(x)` with one shared decode.
    pub fn fd_code_exact(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let floor = self.floor_value();
        Ok(match self.candidate(x).filter(|c| c.inner >= floor) {
            Some(c) => {
                let k = self.k() as f64;
                let plus = (self.k() - c.message.count_ones() as usize) as f64 / k;
                plus * c.inner + (1.0 - plus) * floor
            }
            None => floor,
        })
    }
}

fn sign_to_word(v: &SignVector) -> u128 {
    v.bits().iter().take(2).enumerate().fold(0u128, |acc, (i, &w)| acc | (w as u128) << (64 * i))
}

fn word_to_sign(word: u128, len: usize) -> SignVector {
    let mut words = vec![word as u64];
    if len > 64 {
        words.push((word >> 64) as u64);
    }
    SignVector::from_bits(len, words)
}

/// Number of +1 entries of `z`.
pub fn count_plus(z: &SignVector) -> usize {
    (0..z.dim()).filter(|&i| z.get(i) == 1).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream;
    use rand::seq::index::sample;
    use rand::Rng;

    fn random_message<R: Rng>(k: usize, rng: &mut R) -> SignVector {
        SignVector::random(k, rng)
    }

    #[test]
    fn zero_message_encodes_to_all_plus() {
        for preset in [CodePreset::Bch15_7, CodePreset::Bch127_64] {
            let code = preset.build();
            let cw = code.encode(&SignVector::ones(code.k())).unwrap();
            assert_eq!(cw, SignVector::ones(code.d()));
        }
    }

    #[test]
    fn small_code_exhaustive_distance() {
        let code = CodePreset::Bch15_7.build();
        assert_eq!((code.d(), code.k(), code.r()), (15, 7, 2));
        let words: Vec<SignVector> = (0..1u128 << 7).map(|m| code.encode(&word_to_sign(m, 7)).unwrap()).collect();
        let mut min = usize::MAX;
        for i in 0..words.len() {
            for j in i + 1..words.len() {
                min = min.min(words[i].hamming(&words[j]));
            }
        }
        assert!(min >= 5, "minimum distance {min}");
    }

    #[test]
    fn large_code_sampled_distance() {
        let code = CodePreset::Bch127_64.build();
        let mut rng = stream(5);
        for _ in 0..1000 {
            let a = random_message(64, &mut rng);
            let b = random_message(64, &mut rng);
            if a == b {
                continue;
            }
            let dist = code.encode(&a).unwrap().hamming(&code.encode(&b).unwrap());
            assert!(dist >= 21, "distance {dist}");
        }
    }

    #[test]
    fn round_trip_every_error_weight() {
        for preset in [CodePreset::Bch15_7, CodePreset::Bch127_64] {
            let code = preset.build();
            let mut rng = stream(17);
            for weight in 0..=code.r() {
                for _ in 0..200 {
                    let z = random_message(code.k(), &mut rng);
                    let mut y = code.encode(&z).unwrap();
                    for i in sample(&mut rng, code.d(), weight) {
                        y.flip(i);
                    }
                    assert_eq!(code.decode(&y).unwrap().as_ref(), Some(&z), "{preset} weight {weight}");
                }
            }
        }
    }

    #[test]
    fn random_words_rarely_decode() {
        let code = CodePreset::Bch127_64.build();
        let mut rng = stream(23);
        let decodable =
            (0..1000).filter(|_| code.decode(&SignVector::random(127, &mut rng)).unwrap().is_some()).count();
        // expected fraction ≈ 2^64·|B(10)|/2^127 ≈ 2e-5
        assert!(decodable <= 2, "{decodable} of 1000 random words decoded");
    }

    #[test]
    fn length_errors() {
        let code = CodePreset::Bch15_7.build();
        assert!(matches!(code.encode(&SignVector::ones(6)), Err(Error::LengthMismatch { .. })));
        assert!(matches!(code.decode(&SignVector::ones(14)), Err(Error::LengthMismatch { .. })));
        assert!(code.gj_value_fast(7, &[0.0; 15]).is_err());
        let mut far = vec![0.0; 15];
        far[0] = 1.5;
        assert!(matches!(code.gj_value_fast(0, &far), Err(Error::DomainViolation { .. })));
        let big = CodePreset::Bch127_64.build();
        assert!(matches!(big.gj_value_bruteforce(0, &[0.0; 127]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn codeword_points_take_two_values() {
        let code = CodePreset::Bch127_64.build();
        let mut rng = stream(3);
        for _ in 0..50 {
            let z = random_message(64, &mut rng);
            let w_bar = code.encode(&z).unwrap().normalized();
            for j in 0..64 {
                let v = code.gj_value_fast(j, &w_bar).unwrap();
                let expected = if z.get(j) == 1 { 1.0 } else { 1.0 - 10.0 / 254.0 };
                assert!((v - expected).abs() < 1e-12);
            }
            let plus = count_plus(&z) as f64;
            let fd = code.fd_code_exact(&w_bar).unwrap();
            assert!((fd - (1.0 - (1.0 - plus / 64.0) * 10.0 / 254.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn origin_is_the_floor() {
        let code = CodePreset::Bch15_7.build();
        let zero = [0.0; 15];
        for j in 0..7 {
            assert_eq!(code.gj_value_fast(j, &zero).unwrap(), 1.0 - 2.0 / 30.0);
            assert_eq!(code.gj_value_bruteforce(j, &zero).unwrap(), 1.0 - 2.0 / 30.0);
        }
        assert_eq!(code.fd_code_exact(&zero).unwrap(), 1.0 - 2.0 / 30.0);
    }

    #[test]
    fn negative_coordinate_is_floor_for_bruteforce() {
        let code = CodePreset::Bch15_7.build();
        let mut rng = stream(1);
        let mut z = random_message(7, &mut rng);
        if z.get(3) == 1 {
            z.flip(3);
        }
        let w_bar = code.encode(&z).unwrap().normalized();
        assert!((code.gj_value_bruteforce(3, &w_bar).unwrap() - (1.0 - 2.0 / 30.0)).abs() < 1e-12);
    }

    #[test]
    fn params_report() {
        let p = CodePreset::Bch127_64.build().params();
        assert_eq!((p.d, p.k, p.r, p.field_order_exponent), (127, 64, 10, 7));
        assert!(!p.decode_cost_note.is_empty());
        assert_eq!("127-64".parse::<CodePreset>().unwrap(), CodePreset::Bch127_64);
        assert!("8-4".parse::<CodePreset>().is_err());
    }
}
