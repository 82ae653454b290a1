//! Small dense-vector helpers and the norm index type.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `‖x‖_p` for any `p` in `[1, ∞]`.
pub fn norm_p(x: &[f64], p: NormIndex) -> f64 {
    match p {
        NormIndex::Infinity => x.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        NormIndex::Finite(1.0) => x.iter().map(|v| v.abs()).sum(),
        NormIndex::Finite(2.0) => norm2(x),
        NormIndex::Finite(p) => {
            // scale by the max entry so large p does not overflow
            let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if scale == 0.0 {
                return 0.0;
            }
            scale * x.iter().map(|v| (v.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
        }
    }
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for v in x {
        *v *= alpha;
    }
}

/// An ℓp exponent `p ∈ [1, ∞]`.
///
/// Serialized as a JSON number, or as the string `"inf"` for `p = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormIndex {
    Finite(f64),
    Infinity,
}

impl NormIndex {
    pub const L1: NormIndex = NormIndex::Finite(1.0);
    pub const L2: NormIndex = NormIndex::Finite(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(NormIndex::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(NormIndex::Finite(p))
        } else {
            Err(invalid(format!("norm index p must lie in [1, inf], got {p}")))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            NormIndex::Finite(p) => p,
            NormIndex::Infinity => f64::INFINITY,
        }
    }

    /// Hölder conjugate `q = 1/(1 − 1/p)`; `1 ↔ ∞` handled explicitly.
    pub fn dual(self) -> NormIndex {
        match self {
            NormIndex::Infinity => NormIndex::Finite(1.0),
            NormIndex::Finite(1.0) => NormIndex::Infinity,
            NormIndex::Finite(p) => NormIndex::Finite(1.0 / (1.0 - 1.0 / p)),
        }
    }

    /// `d^{1/p}`, equal to 1 when `p = ∞`.
    pub fn root_of(self, d: usize) -> f64 {
        match self {
            NormIndex::Infinity => 1.0,
            NormIndex::Finite(1.0) => d as f64,
            NormIndex::Finite(2.0) => (d as f64).sqrt(),
            NormIndex::Finite(p) => (d as f64).powf(1.0 / p),
        }
    }
}

impl fmt::Display for NormIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormIndex::Finite(p) => write!(f, "{p}"),
            NormIndex::Infinity => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for NormIndex {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(NormIndex::Infinity),
            other => {
                let p: f64 = other.parse().map_err(|_| invalid(format!("cannot parse norm index '{s}'")))?;
                NormIndex::new(p)
            }
        }
    }
}

impl Serialize for NormIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormIndex::Finite(p) => serializer.serialize_f64(*p),
            NormIndex::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for NormIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct NormVisitor;

        impl Visitor<'_> for NormVisitor {
            type Value = NormIndex;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number >= 1 or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<NormIndex, E> {
                NormIndex::new(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<NormIndex, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<NormIndex, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<NormIndex, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(NormVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_exponents() {
        assert_eq!(NormIndex::L1.dual(), NormIndex::Infinity);
        assert_eq!(NormIndex::Infinity.dual(), NormIndex::L1);
        assert_eq!(NormIndex::L2.dual(), NormIndex::L2);
        match NormIndex::Finite(3.0).dual() {
            NormIndex::Finite(q) => assert!((q - 1.5).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn norms() {
        let x = [3.0, -4.0];
        assert_eq!(norm_p(&x, NormIndex::L1), 7.0);
        assert_eq!(norm_p(&x, NormIndex::L2), 5.0);
        assert_eq!(norm_p(&x, NormIndex::Infinity), 4.0);
        let l3 = norm_p(&x, NormIndex::Finite(3.0));
        assert!((l3 - (27.0f64 + 64.0).powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn norm_index_serde() {
        let inf: NormIndex = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(inf, NormIndex::Infinity);
        let one: NormIndex = serde_json::from_str("1").unwrap();
        assert_eq!(one, NormIndex::L1);
        assert_eq!(serde_json::to_string(&NormIndex::Infinity).unwrap(), "\"inf\"");
        assert!(serde_json::from_str::<NormIndex>("0.5").is_err());
    }
}
