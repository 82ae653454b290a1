//! Primitive narrow-sense binary BCH codes of length `2^m − 1 ≤ 127`.
//!
//! Words are `u128` bit patterns: bit `i` is the coefficient of `x^i` in the
//! code polynomial. Encoding is systematic, with the `k` message bits in
//! positions `n−k .. n`. Decoding is hard-decision: syndromes,
//! Berlekamp–Massey, Chien search, then a re-check that the corrected word
//! is a codeword.

use super::gf::Field;

#[derive(Debug, Clone)]
pub struct Bch {
    field: Field,
    n: usize,
    k: usize,
    t: usize,
    generator: u128,
    gen_degree: usize,
}

impl Bch {
    /// Code of length `2^m − 1` with designed distance `2t + 1`.
    pub fn new(m: u32, t: usize) -> Option<Self> {
        let field = Field::new(m)?;
        let n = field.order();
        if t == 0 || 2 * t >= n {
            return None;
        }
        // g(x) = lcm of the minimal polynomials of α, α², …, α^{2t}
        let mut covered = vec![false; n];
        let mut generator: Vec<u16> = vec![1];
        for i in 1..=2 * t {
            if covered[i] {
                continue;
            }
            let mut coset = Vec::new();
            let mut e = i;
            while !covered[e] {
                covered[e] = true;
                coset.push(e);
                e = (2 * e) % n;
            }
            let mut minimal: Vec<u16> = vec![1];
            for &e in &coset {
                minimal = poly_mul(&field, &minimal, &[field.alpha_pow(e as i64), 1]);
            }
            generator = poly_mul(&field, &generator, &minimal);
        }
        let gen_degree = generator.len() - 1;
        if gen_degree >= n {
            return None;
        }
        let mut bits: u128 = 0;
        for (i, &c) in generator.iter().enumerate() {
            debug_assert!(c <= 1, "minimal polynomials have binary coefficients");
            if c == 1 {
                bits |= 1 << i;
            }
        }
        Some(Bch { field, n, k: n - gen_degree, t, generator: bits, gen_degree })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn field_degree(&self) -> u32 {
        self.field.degree()
    }

    pub fn generator(&self) -> u128 {
        self.generator
    }

    fn remainder(&self, mut word: u128) -> u128 {
        for i in (self.gen_degree..self.n).rev() {
            if word >> i & 1 == 1 {
                word ^= self.generator << (i - self.gen_degree);
            }
        }
        word
    }

    pub fn encode(&self, message: u128) -> u128 {
        debug_assert!(self.k == 128 || message >> self.k == 0);
        let shifted = message << self.gen_degree;
        shifted | self.remainder(shifted)
    }

    pub fn is_codeword(&self, word: u128) -> bool {
        self.remainder(word) == 0
    }

    pub fn message_of(&self, codeword: u128) -> u128 {
        codeword >> self.gen_degree
    }

    /// Corrects up to `t` bit errors. Returns the codeword, or `None` when the
    /// decoder finds no codeword within distance `t`.
    pub fn correct(&self, word: u128) -> Option<u128> {
        let syndromes: Vec<u16> = (1..=2 * self.t)
            .map(|j| {
                (0..self.n)
                    .filter(|&i| word >> i & 1 == 1)
                    .fold(0u16, |acc, i| acc ^ self.field.alpha_pow((i * j) as i64))
            })
            .collect();
        if syndromes.iter().all(|&s| s == 0) {
            return Some(word);
        }
        let locator = self.berlekamp_massey(&syndromes);
        let degree = locator.len() - 1;
        if degree > self.t {
            return None;
        }
        // Chien search: position i is in error iff Λ(α^{−i}) = 0
        let mut errors: u128 = 0;
        let mut found = 0;
        for i in 0..self.n {
            let mut sum = 0u16;
            for (l, &c) in locator.iter().enumerate() {
                sum ^= self.field.mul(c, self.field.alpha_pow(-((i * l) as i64)));
            }
            if sum == 0 {
                errors |= 1 << i;
                found += 1;
            }
        }
        if found != degree {
            return None;
        }
        let corrected = word ^ errors;
        self.is_codeword(corrected).then_some(corrected)
    }

    /// Connection polynomial Λ (lowest degree first, trailing zeros trimmed).
    fn berlekamp_massey(&self, s: &[u16]) -> Vec<u16> {
        let f = &self.field;
        let mut c: Vec<u16> = vec![1];
        let mut b: Vec<u16> = vec![1];
        let mut l = 0usize;
        let mut shift = 1usize;
        let mut last_discrepancy = 1u16;
        for r in 0..s.len() {
            let mut delta = s[r];
            for i in 1..=l.min(c.len() - 1) {
                delta ^= f.mul(c[i], s[r - i]);
            }
            if delta == 0 {
                shift += 1;
                continue;
            }
            let coef = f.div(delta, last_discrepancy);
            let previous = c.clone();
            if c.len() < b.len() + shift {
                c.resize(b.len() + shift, 0);
            }
            for (i, &bi) in b.iter().enumerate() {
                c[i + shift] ^= f.mul(coef, bi);
            }
            if 2 * l <= r {
                l = r + 1 - l;
                b = previous;
                last_discrepancy = delta;
                shift = 1;
            } else {
                shift += 1;
            }
        }
        while c.len() > 1 && *c.last().expect("non-empty") == 0 {
            c.pop();
        }
        c
    }
}

fn poly_mul(f: &Field, a: &[u16], b: &[u16]) -> Vec<u16> {
    let mut out = vec![0u16; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] ^= f.mul(x, y);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_dimensions() {
        let c = Bch::new(4, 2).unwrap();
        assert_eq!((c.n(), c.k()), (15, 7));
        // x^8 + x^7 + x^6 + x^4 + 1
        assert_eq!(c.generator(), 0b1_1101_0001);
        assert_eq!(Bch::new(4, 1).unwrap().k(), 11);
        assert_eq!(Bch::new(4, 3).unwrap().k(), 5);
        assert_eq!(Bch::new(7, 10).unwrap().k(), 64);
        assert_eq!(Bch::new(7, 1).unwrap().k(), 120);
    }

    #[test]
    fn encode_is_systematic_and_cyclic() {
        let c = Bch::new(4, 2).unwrap();
        for msg in 0..(1u128 << 7) {
            let cw = c.encode(msg);
            assert!(c.is_codeword(cw));
            assert_eq!(c.message_of(cw), msg);
            // cyclic shift stays in the code
            let rotated = ((cw << 1) | (cw >> 14)) & ((1 << 15) - 1);
            assert!(c.is_codeword(rotated));
        }
    }

    #[test]
    fn corrects_every_pattern_up_to_t_small_code() {
        let c = Bch::new(4, 2).unwrap();
        let cw = c.encode(0b101_1001);
        assert_eq!(c.correct(cw), Some(cw));
        for i in 0..15 {
            assert_eq!(c.correct(cw ^ (1 << i)), Some(cw));
            for j in i + 1..15 {
                assert_eq!(c.correct(cw ^ (1 << i) ^ (1 << j)), Some(cw));
            }
        }
    }
}
