//! Base sets `W` for the constructions: random sign-vector packings with a
//! pairwise inner-product cap, and `m` evenly spaced unit vectors in the plane.

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::seed;

/// A vector in `{−1, +1}^d`, stored as packed bits (bit set ⇔ entry −1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignVector {
    d: usize,
    negative: Vec<u64>,
}

impl SignVector {
    pub fn from_entries(entries: &[i8]) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("sign vector must have positive dimension"));
        }
        let mut v = SignVector::ones(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            match e {
                1 => {}
                -1 => v.negative[i / 64] |= 1 << (i % 64),
                other => return Err(invalid(format!("sign vector entry {other} is not ±1"))),
            }
        }
        Ok(v)
    }

    /// All-(+1) vector.
    pub fn ones(d: usize) -> Self {
        SignVector { d, negative: vec![0; d.div_ceil(64)] }
    }

    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let mut negative: Vec<u64> = (0..d.div_ceil(64)).map(|_| rng.gen()).collect();
        if !d.is_multiple_of(64) {
            *negative.last_mut().expect("d > 0") &= (1u64 << (d % 64)) - 1;
        }
        SignVector { d, negative }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize) -> i8 {
        assert!(i < self.d);
        if self.negative[i / 64] >> (i % 64) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.d);
        self.negative[i / 64] ^= 1 << (i % 64);
    }

    pub fn entries(&self) -> Vec<i8> {
        (0..self.d).map(|i| self.get(i)).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.d).map(|i| self.get(i) as f64).collect()
    }

    /// `w̄ = w/√d`.
    pub fn normalized(&self) -> Vec<f64> {
        let s = 1.0 / (self.d as f64).sqrt();
        (0..self.d).map(|i| self.get(i) as f64 * s).collect()
    }

    pub fn hamming(&self, other: &SignVector) -> usize {
        assert_eq!(self.d, other.d);
        self.negative.iter().zip(&other.negative).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    /// Exact integer inner product `d − 2·hamming`.
    pub fn inner(&self, other: &SignVector) -> i64 {
        self.d as i64 - 2 * self.hamming(other) as i64
    }

    /// Packed form for the GF(2) codecs: bit i set ⇔ entry i is −1.
    pub(crate) fn bits(&self) -> &[u64] {
        &self.negative
    }

    pub(crate) fn from_bits(d: usize, negative: Vec<u64>) -> Self {
        debug_assert_eq!(negative.len(), d.div_ceil(64));
        SignVector { d, negative }
    }
}

/// `m` distinct sign vectors with every pairwise inner product at most `max_inner`.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedSet {
    d: usize,
    max_inner: i64,
    vectors: Vec<SignVector>,
}

/// Outcome of an exhaustive pairwise check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingReport {
    pub valid: bool,
    /// The pair `(i, j)`, `i < j`, attaining the largest inner product, if `m ≥ 2`.
    pub worst_pair: Option<(usize, usize)>,
    pub worst_inner: Option<i64>,
}

/// Candidate draws allowed per requested vector.
pub const ATTEMPTS_PER_VECTOR: usize = 100;

/// Build a packing of `m` vectors in `{±1}^d` with pairwise inner products at
/// most `d/2` by rejection sampling.
pub fn build_packing(d: usize, m: usize, seed: u64) -> Result<PackedSet> {
    build_packing_with_cap(d, m, seed, d as i64 / 2)
}

/// As [`build_packing`] with an explicit cap on pairwise inner products.
pub fn build_packing_with_cap(d: usize, m: usize, seed: u64, max_inner: i64) -> Result<PackedSet> {
    if d < 6 {
        return Err(invalid(format!("packing needs d >= 6, got {d}")));
    }
    if m == 0 {
        return Err(invalid("packing needs m >= 1"));
    }
    // m ≤ 2^{d/6}, compared in log space
    if (m as f64).log2() > d as f64 / 6.0 {
        return Err(invalid(format!("m = {m} exceeds 2^(d/6) for d = {d}")));
    }
    let mut rng = seed::stream(seed);
    let budget = ATTEMPTS_PER_VECTOR * m;
    let mut vectors: Vec<SignVector> = Vec::with_capacity(m);
    let mut attempts = 0;
    while vectors.len() < m {
        if attempts == budget {
            return Err(Error::ConstructionFailed { d, m, attempts });
        }
        attempts += 1;
        let candidate = SignVector::random(d, &mut rng);
        if vectors.iter().all(|w| w.inner(&candidate) <= max_inner) && !vectors.contains(&candidate) {
            vectors.push(candidate);
        }
    }
    Ok(PackedSet { d, max_inner, vectors })
}

impl PackedSet {
    /// Wrap existing vectors without checking the packing condition; use
    /// [`verify_packing`] to certify.
    pub fn from_vectors(vectors: Vec<SignVector>, max_inner: i64) -> Result<Self> {
        let d = vectors.first().map(SignVector::dim).ok_or_else(|| invalid("empty vector set"))?;
        if let Some(bad) = vectors.iter().find(|v| v.dim() != d) {
            return Err(Error::LengthMismatch { expected: d, got: bad.dim() });
        }
        Ok(PackedSet { d, max_inner, vectors })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn max_inner(&self) -> i64 {
        self.max_inner
    }

    pub fn vectors(&self) -> &[SignVector] {
        &self.vectors
    }

    pub fn get(&self, i: usize) -> &SignVector {
        &self.vectors[i]
    }
}

/// Exhaustive `O(m²d)` check of the packing condition.
pub fn verify_packing(set: &PackedSet) -> PackingReport {
    let mut worst: Option<((usize, usize), i64)> = None;
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            let ip = set.vectors[i].inner(&set.vectors[j]);
            if worst.is_none_or(|(_, w)| ip > w) {
                worst = Some(((i, j), ip));
            }
        }
    }
    PackingReport {
        valid: worst.is_none_or(|(_, ip)| ip <= set.max_inner),
        worst_pair: worst.map(|(p, _)| p),
        worst_inner: worst.map(|(_, ip)| ip),
    }
}

#[derive(Serialize, Deserialize)]
struct PackedSetDoc {
    d: usize,
    m: usize,
    max_inner: i64,
    vectors: Vec<Vec<i8>>,
}

impl Serialize for PackedSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PackedSetDoc {
            d: self.d,
            m: self.len(),
            max_inner: self.max_inner,
            vectors: self.vectors.iter().map(SignVector::entries).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PackedSet {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = PackedSetDoc::deserialize(de)?;
        if doc.vectors.len() != doc.m {
            return Err(D::Error::custom(format!(
                "document declares m = {} but lists {} vectors",
                doc.m,
                doc.vectors.len()
            )));
        }
        let vectors = doc
            .vectors
            .iter()
            .map(|v| {
                if v.len() != doc.d {
                    return Err(D::Error::custom(format!("vector of length {} in d = {}", v.len(), doc.d)));
                }
                SignVector::from_entries(v).map_err(D::Error::custom)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        PackedSet::from_vectors(vectors, doc.max_inner).map_err(D::Error::custom)
    }
}

/// `m` unit vectors `w^i = (sin(2πi/m), cos(2πi/m))`, `i = 1..=m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleSet {
    m: usize,
    vectors: Vec<[f64; 2]>,
}

pub fn build_circle_set(m: usize) -> Result<CircleSet> {
    if m < 2 {
        return Err(invalid(format!("circle set needs m >= 2, got {m}")));
    }
    let vectors = (1..=m)
        .map(|i| {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            [theta.sin(), theta.cos()]
        })
        .collect();
    Ok(CircleSet { m, vectors })
}

impl CircleSet {
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vectors(&self) -> &[[f64; 2]] {
        &self.vectors
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.m {
            for j in i + 1..self.m {
                let [a, b] = self.vectors[i];
                let [c, e] = self.vectors[j];
                best = best.min(((a - c).powi(2) + (b - e).powi(2)).sqrt());
            }
        }
        best
    }
}
