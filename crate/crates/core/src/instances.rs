//! The convex function families and their exact population objectives.
//!
//! Every family is a distribution over functions indexed either by a random
//! subset `V` of a base set `W` (each element included independently with
//! probability `α`) or, for the code family, by a uniform coordinate
//! `j ∈ [k]`.
//!
//! | family          | member function                                   | domain      |
//! |-----------------|---------------------------------------------------|-------------|
//! | `nonsmooth-l2`  | `max{1/2, max_{w∈V} ⟨w̄, x⟩}`                      | `B₂(1)`     |
//! | `lp`            | `max{1/2, max_{w∈V} ⟨w, x⟩ / d^{1/q}}`            | `B_p(1)`    |
//! | `smooth`        | `Σ_{w∈V} ν(⟨w̄, x⟩ − 7/8)`, `ν(a) = max(a, 0)²`   | `B₂(1)`     |
//! | `l1reg`         | `h_V(x − 1̄/√d) − λ⟨1̄, x⟩`                         | `B₂(2)`     |
//! | `scaled`        | `L·max{R/2, max_{w∈V} ⟨w̄, x⟩}`, `α = 2ε/(LR)`    | `B₂(R)`     |
//! | `code`          | `max{1 − r/(2d), max_{w∈W_j} ⟨w̄, x⟩}`             | `B₂(1)`     |
//! | `bounded-range` | `Σ_{w∈V} φ_α(⟨w, x⟩)`, `α = 2/m²`, `d = 2`        | `B₂(1)`     |

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::codes::{BchCode, CodePreset};
use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, norm_p};
use crate::mask::Mask;
use crate::packing::{build_circle_set, build_packing_with_cap, CircleSet, PackedSet};

pub use crate::linalg::NormIndex;

/// Kink of the smoothed hinge in the smooth and ℓ1-regularized families.
pub const SMOOTH_KINK: f64 = 7.0 / 8.0;

/// Relative slack on domain membership checks.
pub const DOMAIN_SLACK: f64 = 1e-9;

/// Family identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    #[serde(rename = "nonsmooth-l2")]
    NonsmoothL2,
    #[serde(rename = "lp")]
    LpScaled,
    #[serde(rename = "smooth")]
    Smooth,
    #[serde(rename = "l1reg")]
    L1Reg,
    #[serde(rename = "scaled")]
    ScaledAlpha,
    #[serde(rename = "code")]
    CodeBased,
    #[serde(rename = "bounded-range")]
    BoundedRange,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 7] = [
        FamilyKind::NonsmoothL2,
        FamilyKind::LpScaled,
        FamilyKind::Smooth,
        FamilyKind::L1Reg,
        FamilyKind::ScaledAlpha,
        FamilyKind::CodeBased,
        FamilyKind::BoundedRange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::NonsmoothL2 => "nonsmooth-l2",
            FamilyKind::LpScaled => "lp",
            FamilyKind::Smooth => "smooth",
            FamilyKind::L1Reg => "l1reg",
            FamilyKind::ScaledAlpha => "scaled",
            FamilyKind::CodeBased => "code",
            FamilyKind::BoundedRange => "bounded-range",
        }
    }

    pub fn is_subset_family(self) -> bool {
        self != FamilyKind::CodeBased
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| invalid(format!("unknown family '{s}'")))
    }
}

/// Parameters of a random sign-vector packing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingParams {
    pub d: usize,
    pub m: usize,
    pub seed: u64,
    /// Pairwise inner-product cap; `d/2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_inner: Option<i64>,
}

impl PackingParams {
    pub fn new(d: usize, m: usize, seed: u64) -> Self {
        PackingParams { d, m, seed, max_inner: None }
    }

    pub fn build(&self) -> Result<PackedSet> {
        build_packing_with_cap(self.d, self.m, self.seed, self.max_inner.unwrap_or(self.d as i64 / 2))
    }
}

/// A distribution over convex functions: family tag plus every parameter
/// needed to rebuild it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum DistributionSpec {
    #[serde(rename = "nonsmooth-l2")]
    NonsmoothL2 { packing: PackingParams },
    #[serde(rename = "lp")]
    LpScaled { packing: PackingParams, p: NormIndex },
    #[serde(rename = "smooth")]
    Smooth { packing: PackingParams },
    #[serde(rename = "l1reg")]
    L1Reg { packing: PackingParams, lambda: f64 },
    #[serde(rename = "scaled")]
    ScaledAlpha { packing: PackingParams, lipschitz: f64, radius: f64, eps: f64 },
    #[serde(rename = "code")]
    CodeBased { code: CodePreset },
    #[serde(rename = "bounded-range")]
    BoundedRange { m: usize },
}

impl DistributionSpec {
    pub fn kind(&self) -> FamilyKind {
        match self {
            DistributionSpec::NonsmoothL2 { .. } => FamilyKind::NonsmoothL2,
            DistributionSpec::LpScaled { .. } => FamilyKind::LpScaled,
            DistributionSpec::Smooth { .. } => FamilyKind::Smooth,
            DistributionSpec::L1Reg { .. } => FamilyKind::L1Reg,
            DistributionSpec::ScaledAlpha { .. } => FamilyKind::ScaledAlpha,
            DistributionSpec::CodeBased { .. } => FamilyKind::CodeBased,
            DistributionSpec::BoundedRange { .. } => FamilyKind::BoundedRange,
        }
    }

    pub fn packing(&self) -> Option<&PackingParams> {
        match self {
            DistributionSpec::NonsmoothL2 { packing }
            | DistributionSpec::LpScaled { packing, .. }
            | DistributionSpec::Smooth { packing }
            | DistributionSpec::L1Reg { packing, .. }
            | DistributionSpec::ScaledAlpha { packing, .. } => Some(packing),
            _ => None,
        }
    }

    /// Inclusion probability of each base element in a sampled subset.
    pub fn alpha(&self) -> f64 {
        match *self {
            DistributionSpec::ScaledAlpha { lipschitz, radius, eps, .. } => 2.0 * eps / (lipschitz * radius),
            _ => 0.5,
        }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&json))
    }

    fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::L1Reg { ref packing, lambda } => {
                let cap = 1.0 / (packing.d as f64).sqrt();
                if !(lambda > 0.0 && lambda <= cap * (1.0 + 1e-12)) {
                    return Err(invalid(format!("lambda must lie in (0, 1/sqrt(d)] = (0, {cap}], got {lambda}")));
                }
            }
            DistributionSpec::ScaledAlpha { lipschitz, radius, eps, .. } => {
                if !(lipschitz > 0.0 && radius > 0.0 && eps > 0.0) {
                    return Err(invalid("scaled family needs L > 0, R > 0 and eps > 0"));
                }
                let alpha = self.alpha();
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(invalid(format!("alpha = 2 eps/(L R) must lie in (0, 1), got {alpha}")));
                }
            }
            DistributionSpec::BoundedRange { m } if m < 2 => {
                return Err(invalid(format!("bounded-range family needs m >= 2, got {m}")));
            }
            _ => {}
        }
        Ok(())
    }
}

/// The per-sample payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Payload {
    /// Member subset of the base set.
    Subset(Mask),
    /// Code coordinate `j`.
    Index(usize),
}

/// One sampled function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSample {
    pub family: FamilyKind,
    #[serde(flatten)]
    pub payload: Payload,
}

impl FunctionSample {
    pub fn subset(family: FamilyKind, mask: Mask) -> Self {
        FunctionSample { family, payload: Payload::Subset(mask) }
    }

    pub fn index(j: usize) -> Self {
        FunctionSample { family: FamilyKind::CodeBased, payload: Payload::Index(j) }
    }

    pub fn mask(&self) -> Option<&Mask> {
        match &self.payload {
            Payload::Subset(m) => Some(m),
            Payload::Index(_) => None,
        }
    }

    pub fn code_index(&self) -> Option<usize> {
        match self.payload {
            Payload::Index(j) => Some(j),
            Payload::Subset(_) => None,
        }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("sample serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub subgradient: Vec<f64>,
}

/// Certified constants of a family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzBound {
    pub lipschitz: f64,
    /// Norm the Lipschitz constant refers to.
    pub norm: NormIndex,
    /// Lipschitz constant of the gradient (ℓ2), for differentiable families.
    pub smoothness: Option<f64>,
    /// Set when the constant grows without bound with the family's resolution knob.
    pub unbounded: bool,
}

/// Base vectors laid out row-major with the per-family linear map
/// `a_i(x) = scale·⟨row_i, x⟩ − offset_i`.
#[derive(Debug, Clone)]
struct Rows {
    d: usize,
    data: Vec<f64>,
    scale: f64,
    offsets: Vec<f64>,
}

impl Rows {
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    fn len(&self) -> usize {
        self.offsets.len()
    }

    fn linear(&self, i: usize, x: &[f64]) -> f64 {
        self.scale * dot(self.row(i), x) - self.offsets[i]
    }
}

#[derive(Debug, Clone)]
enum Base {
    Signs { set: PackedSet, rows: Rows },
    Circle { set: CircleSet, rows: Rows },
    Code(BchCode),
}

/// Per-point data shared by every sample evaluated at the same `x`.
#[derive(Debug, Clone)]
pub struct Prepared {
    linear: Vec<f64>,
    extra: f64,
    code: Option<CodeAtPoint>,
}

#[derive(Debug, Clone)]
struct CodeAtPoint {
    /// Value of each `g_j`: the active codeword's inner product where
    /// `z_j = +1`, the floor elsewhere.
    values: Vec<f64>,
}

/// A built distribution: spec plus its base set.
#[derive(Debug, Clone)]
pub struct Distribution {
    spec: DistributionSpec,
    base: Base,
}

impl Distribution {
    pub fn new(spec: DistributionSpec) -> Result<Self> {
        spec.validate()?;
        let base = match &spec {
            DistributionSpec::CodeBased { code } => Base::Code(code.build()),
            DistributionSpec::BoundedRange { m } => {
                let set = build_circle_set(*m)?;
                let data = set.vectors().iter().flat_map(|v| v.iter().copied()).collect();
                let rows = Rows { d: 2, data, scale: 1.0, offsets: vec![0.0; *m] };
                Base::Circle { set, rows }
            }
            other => {
                let packing = other.packing().expect("subset families carry packing params");
                return Distribution::with_packing(spec.clone(), packing.build()?);
            }
        };
        Ok(Distribution { spec, base })
    }

    /// Use an existing packing (for instance one loaded from JSON) as the base set.
    pub fn with_packing(spec: DistributionSpec, set: PackedSet) -> Result<Self> {
        spec.validate()?;
        let params = spec
            .packing()
            .ok_or_else(|| invalid(format!("family {} does not use a sign-vector packing", spec.kind())))?;
        if params.d != set.dim() || params.m != set.len() {
            return Err(invalid(format!(
                "packing has d = {}, m = {} but the spec asks for d = {}, m = {}",
                set.dim(),
                set.len(),
                params.d,
                params.m
            )));
        }
        let d = set.dim();
        let data: Vec<f64> = set.vectors().iter().flat_map(|w| w.to_f64()).collect();
        let sqrt_d = (d as f64).sqrt();
        let scale = match spec {
            DistributionSpec::LpScaled { p, .. } => 1.0 / p.dual().root_of(d),
            DistributionSpec::ScaledAlpha { lipschitz, .. } => lipschitz / sqrt_d,
            _ => 1.0 / sqrt_d,
        };
        let offsets = match spec {
            // ⟨w̄, 1̄/√d⟩ = Σw/d
            DistributionSpec::L1Reg { .. } => {
                set.vectors().iter().map(|w| w.entries().iter().map(|&e| e as f64).sum::<f64>() / d as f64).collect()
            }
            _ => vec![0.0; set.len()],
        };
        let rows = Rows { d, data, scale, offsets };
        Ok(Distribution { spec, base: Base::Signs { set, rows } })
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn kind(&self) -> FamilyKind {
        self.spec.kind()
    }

    pub fn dim(&self) -> usize {
        match &self.base {
            Base::Signs { set, .. } => set.dim(),
            Base::Circle { .. } => 2,
            Base::Code(code) => code.d(),
        }
    }

    /// `m` for subset families, `k` for the code family.
    pub fn base_len(&self) -> usize {
        match &self.base {
            Base::Signs { set, .. } => set.len(),
            Base::Circle { set, .. } => set.len(),
            Base::Code(code) => code.k(),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha()
    }

    pub fn packed_set(&self) -> Option<&PackedSet> {
        match &self.base {
            Base::Signs { set, .. } => Some(set),
            _ => None,
        }
    }

    pub fn circle_set(&self) -> Option<&CircleSet> {
        match &self.base {
            Base::Circle { set, .. } => Some(set),
            _ => None,
        }
    }

    pub fn code(&self) -> Option<&BchCode> {
        match &self.base {
            Base::Code(code) => Some(code),
            _ => None,
        }
    }

    /// Kink parameter `α = 2/m²` of the bounded-range family.
    pub fn kink_alpha(&self) -> Option<f64> {
        match self.spec {
            DistributionSpec::BoundedRange { m } => Some(2.0 / (m * m) as f64),
            _ => None,
        }
    }

    /// The domain ball `(p, R)`.
    pub fn domain(&self) -> (NormIndex, f64) {
        match self.spec {
            DistributionSpec::LpScaled { p, .. } => (p, 1.0),
            DistributionSpec::L1Reg { .. } => (NormIndex::L2, 2.0),
            DistributionSpec::ScaledAlpha { radius, .. } => (NormIndex::L2, radius),
            _ => (NormIndex::L2, 1.0),
        }
    }

    pub fn check_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), got: x.len() });
        }
        let (p, radius) = self.domain();
        let norm = norm_p(x, p);
        if norm.is_nan() || norm > radius * (1.0 + DOMAIN_SLACK) {
            return Err(Error::DomainViolation { norm, radius });
        }
        Ok(())
    }

    /// Draw one function.
    pub fn sample_function<R: Rng + ?Sized>(&self, rng: &mut R) -> FunctionSample {
        match &self.base {
            Base::Code(code) => FunctionSample::index(rng.gen_range(0..code.k())),
            _ => FunctionSample::subset(self.kind(), Mask::bernoulli(self.base_len(), self.alpha(), rng)),
        }
    }

    fn check_sample(&self, sample: &FunctionSample) -> Result<()> {
        if sample.family != self.kind() {
            return Err(invalid(format!("sample of family {} given to {}", sample.family, self.kind())));
        }
        match &sample.payload {
            Payload::Subset(mask) if mask.len() != self.base_len() => {
                Err(Error::LengthMismatch { expected: self.base_len(), got: mask.len() })
            }
            Payload::Index(j) if *j >= self.base_len() => {
                Err(invalid(format!("code index {j} out of range for k = {}", self.base_len())))
            }
            Payload::Subset(_) if !self.kind().is_subset_family() => Err(invalid("code family needs an index")),
            Payload::Index(_) if self.kind().is_subset_family() => Err(invalid("subset family needs a mask")),
            _ => Ok(()),
        }
    }

    fn rows(&self) -> Option<&Rows> {
        match &self.base {
            Base::Signs { rows, .. } | Base::Circle { rows, .. } => Some(rows),
            Base::Code(_) => None,
        }
    }

    /// Floor `c` of the max families.
    fn floor(&self) -> Option<f64> {
        match self.spec {
            DistributionSpec::NonsmoothL2 { .. } | DistributionSpec::LpScaled { .. } => Some(0.5),
            DistributionSpec::ScaledAlpha { lipschitz, radius, .. } => Some(lipschitz * radius / 2.0),
            _ => None,
        }
    }

    /// Component term `φ(a)` of the additive families and its derivative.
    fn component(&self, a: f64) -> (f64, f64) {
        match self.spec {
            DistributionSpec::BoundedRange { .. } => {
                let alpha = self.kink_alpha().expect("bounded-range");
                if a <= 1.0 - alpha {
                    (0.0, 0.0)
                } else {
                    ((a - 1.0 + alpha) / alpha, 1.0 / alpha)
                }
            }
            _ => {
                let t = a - SMOOTH_KINK;
                if t <= 0.0 {
                    (0.0, 0.0)
                } else {
                    (t * t, 2.0 * t)
                }
            }
        }
    }

    /// Linear term added to every member function (`−λ⟨1̄, x⟩` for `l1reg`).
    fn extra_linear(&self, x: &[f64]) -> f64 {
        match self.spec {
            DistributionSpec::L1Reg { lambda, .. } => -lambda * x.iter().sum::<f64>(),
            _ => 0.0,
        }
    }

    /// Precompute everything the member functions need at `x`.
    pub fn prepare(&self, x: &[f64]) -> Result<Prepared> {
        self.check_domain(x)?;
        Ok(match &self.base {
            Base::Code(code) => {
                let values = code.all_values(x)?;
                Prepared { linear: Vec::new(), extra: 0.0, code: Some(CodeAtPoint { values }) }
            }
            _ => {
                let rows = self.rows().expect("subset family");
                let linear = (0..rows.len()).map(|i| rows.linear(i, x)).collect();
                Prepared { linear, extra: self.extra_linear(x), code: None }
            }
        })
    }

    /// Member value from prepared point data.
    pub fn value_prepared(&self, sample: &FunctionSample, prepared: &Prepared) -> f64 {
        match &sample.payload {
            Payload::Index(j) => prepared.code.as_ref().expect("code point data").values[*j],
            Payload::Subset(mask) => match self.floor() {
                Some(c) => mask.iter_ones().map(|i| prepared.linear[i]).fold(c, f64::max),
                None => mask.iter_ones().map(|i| self.component(prepared.linear[i]).0).sum::<f64>() + prepared.extra,
            },
        }
    }

    pub fn value(&self, sample: &FunctionSample, x: &[f64]) -> Result<f64> {
        self.check_sample(sample)?;
        if let (Payload::Index(j), Some(code)) = (&sample.payload, self.code()) {
            self.check_domain(x)?;
            return code.gj_value_fast(*j, x);
        }
        let prepared = self.prepare(x)?;
        Ok(self.value_prepared(sample, &prepared))
    }

    pub fn subgradient(&self, sample: &FunctionSample, x: &[f64]) -> Result<Vec<f64>> {
        self.check_sample(sample)?;
        self.check_domain(x)?;
        let d = self.dim();
        let mask = match &sample.payload {
            Payload::Index(j) => return self.code().expect("code family").gj_subgradient(*j, x),
            Payload::Subset(mask) => mask,
        };
        let rows = self.rows().expect("subset family");
        let mut g = vec![0.0; d];
        match self.floor() {
            Some(c) => {
                // active maximizer, smallest index on ties; floor branch on a tie with c
                let mut best: Option<(usize, f64)> = None;
                for i in mask.iter_ones() {
                    let a = rows.linear(i, x);
                    if a > c && best.is_none_or(|(_, b)| a > b) {
                        best = Some((i, a));
                    }
                }
                if let Some((i, _)) = best {
                    for (gk, rk) in g.iter_mut().zip(rows.row(i)) {
                        *gk = rows.scale * rk;
                    }
                }
            }
            None => {
                for i in mask.iter_ones() {
                    let slope = self.component(rows.linear(i, x)).1;
                    if slope != 0.0 {
                        for (gk, rk) in g.iter_mut().zip(rows.row(i)) {
                            *gk += slope * rows.scale * rk;
                        }
                    }
                }
                if let DistributionSpec::L1Reg { lambda, .. } = self.spec {
                    for gk in &mut g {
                        *gk -= lambda;
                    }
                }
            }
        }
        Ok(g)
    }

    pub fn evaluate(&self, sample: &FunctionSample, x: &[f64]) -> Result<EvalResult> {
        Ok(EvalResult { value: self.value(sample, x)?, subgradient: self.subgradient(sample, x)? })
    }

    /// Exact `F_D(x) = E_{f∼D}[f(x)]`.
    ///
    /// For the max families, with `a_(1) ≥ … ≥ a_(K)` the linear values above
    /// the floor `c`, the maximum over the included ones is `a_(i)` exactly
    /// when `a_(i)` is included and `a_(1..i)` are not, so
    /// `F_D(x) = Σ_i α(1−α)^{i−1} a_(i) + (1−α)^K c`.
    pub fn population_value(&self, x: &[f64]) -> Result<f64> {
        self.check_domain(x)?;
        if let Some(code) = self.code() {
            return code.fd_code_exact(x);
        }
        let rows = self.rows().expect("subset family");
        let alpha = self.alpha();
        Ok(match self.floor() {
            Some(c) => {
                let mut above: Vec<f64> = (0..rows.len()).map(|i| rows.linear(i, x)).filter(|&a| a > c).collect();
                above.sort_by(|a, b| b.total_cmp(a));
                let mut miss = 1.0;
                let mut total = 0.0;
                for a in above {
                    total += alpha * miss * a;
                    miss *= 1.0 - alpha;
                }
                total + miss * c
            }
            None => {
                let sum: f64 = (0..rows.len()).map(|i| self.component(rows.linear(i, x)).0).sum();
                alpha * sum + self.extra_linear(x)
            }
        })
    }

    /// Regularizer added to the objective the family is judged on:
    /// `λ‖x‖₁` for `l1reg`, zero otherwise.
    pub fn regularizer(&self, x: &[f64]) -> f64 {
        match self.spec {
            DistributionSpec::L1Reg { lambda, .. } => lambda * norm_p(x, NormIndex::L1),
            _ => 0.0,
        }
    }

    /// Population objective the generalization gap is measured on:
    /// `F_D(x) + regularizer(x)`.
    pub fn population_objective(&self, x: &[f64]) -> Result<f64> {
        Ok(self.population_value(x)? + self.regularizer(x))
    }

    /// `F* = min over the domain of the population objective`.
    pub fn population_min(&self) -> f64 {
        match self.spec {
            DistributionSpec::NonsmoothL2 { .. } | DistributionSpec::LpScaled { .. } => 0.5,
            DistributionSpec::Smooth { .. }
            | DistributionSpec::L1Reg { .. }
            | DistributionSpec::BoundedRange { .. } => 0.0,
            DistributionSpec::ScaledAlpha { lipschitz, radius, .. } => lipschitz * radius / 2.0,
            DistributionSpec::CodeBased { .. } => self.code().expect("code family").floor_value(),
        }
    }

    /// Minimum of every empirical (regularized, for `l1reg`) objective. Equal
    /// to [`Self::population_min`] for all families: each member function
    /// attains it at the origin.
    pub fn empirical_min(&self) -> f64 {
        self.population_min()
    }

    pub fn lipschitz_bound(&self) -> LipschitzBound {
        let plain = |lipschitz| LipschitzBound { lipschitz, norm: NormIndex::L2, smoothness: None, unbounded: false };
        match self.spec {
            DistributionSpec::NonsmoothL2 { .. } | DistributionSpec::CodeBased { .. } => plain(1.0),
            DistributionSpec::LpScaled { p, .. } => LipschitzBound { norm: p, ..plain(1.0) },
            // ν'' = 2, so the gradient of each component is 2-Lipschitz
            DistributionSpec::Smooth { .. } => LipschitzBound { smoothness: Some(2.0), ..plain(0.25) },
            // certified on the unit ball around 1̄/√d, not on all of B₂(2)
            DistributionSpec::L1Reg { .. } => LipschitzBound { smoothness: Some(2.0), ..plain(2.25) },
            DistributionSpec::ScaledAlpha { lipschitz, .. } => plain(lipschitz),
            DistributionSpec::BoundedRange { m } => LipschitzBound { unbounded: true, ..plain((m * m) as f64 / 2.0) },
        }
    }

    /// The point the bad ERM selects when base element `i` is uncovered:
    /// `w̄`, `w/d^{1/p}`, `R·w̄`, `w̄ + 1̄/√d`, or the circle vector itself.
    /// `None` for the code family.
    pub fn witness_point(&self, i: usize) -> Option<Vec<f64>> {
        let (set, d) = match &self.base {
            Base::Signs { set, .. } => (set, set.dim()),
            Base::Circle { set, .. } => return Some(set.vectors()[i].to_vec()),
            Base::Code(_) => return None,
        };
        let w = set.get(i);
        let sqrt_d = (d as f64).sqrt();
        Some(match self.spec {
            DistributionSpec::LpScaled { p, .. } => {
                let s = 1.0 / p.root_of(d);
                w.to_f64().into_iter().map(|v| v * s).collect()
            }
            DistributionSpec::ScaledAlpha { radius, .. } => w.normalized().into_iter().map(|v| v * radius).collect(),
            DistributionSpec::L1Reg { .. } => w.normalized().into_iter().map(|v| v + 1.0 / sqrt_d).collect(),
            _ => w.normalized(),
        })
    }

    /// Indices `i` of the whole base set whose component is strictly active
    /// at `x` (`⟨w̄, x⟩ > 7/8` for `smooth`, `φ_α(⟨w, x⟩) > 0` for
    /// `bounded-range`, shifted argument for `l1reg`).
    pub fn active_components(&self, x: &[f64]) -> Vec<usize> {
        let Some(rows) = self.rows().filter(|_| self.floor().is_none()) else {
            return Vec::new();
        };
        (0..rows.len()).filter(|&i| self.component(rows.linear(i, x)).0 > 0.0).collect()
    }
}
