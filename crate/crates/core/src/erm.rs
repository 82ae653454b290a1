//! Empirical objectives, the closed-form bad ERM selectors, and a projected
//! subgradient baseline.
//!
//! The selectors never search: each one returns the point the lower-bound
//! construction prescribes, and [`verify_erm`] then confirms it is an exact
//! empirical minimizer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instances::{Distribution, FamilyKind, FunctionSample, NormIndex};
use crate::linalg::{norm2, norm_p};
use crate::mask::Mask;
use crate::packing::SignVector;
use crate::seed::stream;

/// Tolerance of [`verify_erm`].
pub const VERIFY_TOL: f64 = 1e-9;

/// `n` sampled functions from one distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub family: FamilyKind,
    pub samples: Vec<FunctionSample>,
    /// Seed the samples were drawn with, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SampleSet {
    pub fn new(dist: &Distribution, samples: Vec<FunctionSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("a sample set needs at least one function"));
        }
        for s in &samples {
            let ok = s.family == dist.kind()
                && match (s.mask(), s.code_index()) {
                    (Some(mask), _) => mask.len() == dist.base_len(),
                    (_, Some(j)) => j < dist.base_len(),
                    _ => false,
                };
            if !ok {
                return Err(invalid(format!("sample {s:?} does not belong to family {}", dist.kind())));
            }
        }
        Ok(SampleSet { family: dist.kind(), samples, seed: None })
    }

    /// Draw `n` functions from a stream seeded with `seed`.
    pub fn draw(dist: &Distribution, n: usize, seed: u64) -> Result<Self> {
        let mut rng = stream(seed);
        let samples = (0..n).map(|_| dist.sample_function(&mut rng)).collect();
        let mut set = SampleSet::new(dist, samples)?;
        set.seed = Some(seed);
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Union of the sampled subsets (`None` for the code family).
    pub fn union(&self, base_len: usize) -> Option<Mask> {
        let mut union = Mask::empty(base_len);
        for s in &self.samples {
            union.union_with(s.mask()?);
        }
        Some(union)
    }

    /// Sorted distinct code indices `I` (empty for subset families).
    pub fn distinct_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.samples.iter().filter_map(|s| s.code_index()).collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }
}

/// Result of running a bad ERM selector on one sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErmOutcome {
    pub point: Vec<f64>,
    /// Subset families: some base element was left uncovered. Code family:
    /// at most `k/2` distinct indices were sampled.
    pub adversary_succeeded: bool,
    /// Base index the selector used, for subset families.
    pub uncovered_index: Option<usize>,
    /// `F_S(x̂)`.
    pub empirical_value: f64,
    /// `F_S(x̂)` plus the family's regularizer; equals `empirical_value`
    /// except for `l1reg`.
    pub empirical_objective: f64,
    /// `F_D(x̂)`.
    pub population_value: f64,
    /// Population objective at `x̂` minus its minimum.
    pub gap: f64,
    pub seed: Option<u64>,
    pub spec_digest: String,
    pub sample_digests: Vec<String>,
}

/// `F_S(x) = (1/n) Σ f^i(x)`.
pub fn empirical_value(dist: &Distribution, set: &SampleSet, x: &[f64]) -> Result<f64> {
    if set.is_empty() {
        return Err(invalid("empty sample set"));
    }
    let prepared = dist.prepare(x)?;
    let mut total = 0.0;
    for s in &set.samples {
        if s.family != dist.kind() {
            return Err(invalid(format!("sample of family {} given to {}", s.family, dist.kind())));
        }
        total += dist.value_prepared(s, &prepared);
    }
    Ok(total / set.len() as f64)
}

/// `F_S(x)` plus the family's regularizer.
pub fn empirical_objective(dist: &Distribution, set: &SampleSet, x: &[f64]) -> Result<f64> {
    Ok(empirical_value(dist, set, x)? + dist.regularizer(x))
}

/// The bad empirical minimizer.
///
/// Subset families return the witness point of the uncovered base element
/// with the smallest index, or the origin when every element is covered. The
/// code family always returns `G(z^I)/√d` where `z^I_j = −1` exactly for the
/// sampled indices `j ∈ I`.
pub fn adversarial_erm(dist: &Distribution, set: &SampleSet) -> Result<ErmOutcome> {
    let (point, succeeded, uncovered) = match dist.code() {
        Some(code) => {
            let indices = set.distinct_indices();
            let mut entries = vec![1i8; code.k()];
            for &j in &indices {
                entries[j] = -1;
            }
            let codeword = code.encode(&SignVector::from_entries(&entries)?)?;
            (codeword.normalized(), 2 * indices.len() <= code.k(), None)
        }
        None => {
            let union = set.union(dist.base_len()).ok_or_else(|| invalid("subset family sample set expected"))?;
            match union.first_zero() {
                Some(i) => (dist.witness_point(i).expect("subset family"), true, Some(i)),
                None => (vec![0.0; dist.dim()], false, None),
            }
        }
    };
    let empirical_value = empirical_value(dist, set, &point)?;
    let population_value = dist.population_value(&point)?;
    let gap = population_value + dist.regularizer(&point) - dist.population_min();
    Ok(ErmOutcome {
        empirical_objective: empirical_value + dist.regularizer(&point),
        point,
        adversary_succeeded: succeeded,
        uncovered_index: uncovered,
        empirical_value,
        population_value,
        gap,
        seed: set.seed,
        spec_digest: dist.spec().digest(),
        sample_digests: set.samples.iter().map(FunctionSample::digest).collect(),
    })
}

/// Whether `outcome.point` attains the analytic empirical minimum (of the
/// regularized empirical objective for `l1reg`) within [`VERIFY_TOL`].
/// Recomputes the objective rather than trusting the stored value.
pub fn verify_erm(dist: &Distribution, set: &SampleSet, outcome: &ErmOutcome) -> bool {
    match empirical_objective(dist, set, &outcome.point) {
        Ok(v) => (v - dist.empirical_min()).abs() <= VERIFY_TOL,
        Err(_) => false,
    }
}

/// Euclidean projection onto `B_p(R)` for `p ∈ {1, 2, ∞}`.
pub fn project(x: &[f64], p: NormIndex, radius: f64) -> Result<Vec<f64>> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    let supported = p == NormIndex::Infinity || p == NormIndex::L1 || p == NormIndex::L2;
    if !supported {
        return Err(Error::Unsupported(format!("projection onto the l{p} ball")));
    }
    if norm_p(x, p) <= radius {
        return Ok(x.to_vec());
    }
    Ok(if p == NormIndex::Infinity {
        x.iter().map(|v| v.clamp(-radius, radius)).collect()
    } else if p == NormIndex::L1 {
        project_l1(x, radius)
    } else {
        let s = radius / norm2(x);
        x.iter().map(|v| v * s).collect()
    })
}

/// Sort-based projection onto the ℓ1 ball: soft-threshold at the `θ` that
/// makes the ℓ1 norm exactly `radius`.
fn project_l1(x: &[f64], radius: f64) -> Vec<f64> {
    let mut u: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - radius) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    x.iter().map(|&v| v.signum() * (v.abs() - theta).max(0.0)).collect()
}

/// Single-pass projected subgradient descent with iterate averaging on the
/// family's population objective: `x_1 = 0`, `x_{t+1} = P(x_t − η g_t)` with
/// `η = R/(L√n)`, one fresh sample per step. Returns the average of
/// `x_1, …, x_n`.
pub fn sgd_baseline<R: Rng + ?Sized>(dist: &Distribution, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let bound = dist.lipschitz_bound();
    if bound.unbounded {
        return Err(Error::Unsupported(format!(
            "family {} has no finite Lipschitz constant; the baseline does not apply",
            dist.kind()
        )));
    }
    if n == 0 {
        return Err(invalid("the baseline needs n >= 1"));
    }
    let (p, radius) = dist.domain();
    let eta = radius / (bound.lipschitz * (n as f64).sqrt());
    let lambda = match dist.spec() {
        crate::instances::DistributionSpec::L1Reg { lambda, .. } => *lambda,
        _ => 0.0,
    };
    let d = dist.dim();
    let mut x = vec![0.0; d];
    let mut sum = vec![0.0; d];
    for _ in 0..n {
        for (s, v) in sum.iter_mut().zip(&x) {
            *s += v;
        }
        let sample = dist.sample_function(rng);
        let g = dist.subgradient(&sample, &x)?;
        let step: Vec<f64> = x
            .iter()
            .zip(&g)
            .map(|(xi, gi)| {
                // subgradient of λ‖x‖₁, zero at the kink
                let reg = if *xi > 0.0 {
                    lambda
                } else if *xi < 0.0 {
                    -lambda
                } else {
                    0.0
                };
                xi - eta * (gi + reg)
            })
            .collect();
        x = project(&step, p, radius)?;
    }
    Ok(sum.into_iter().map(|s| s / n as f64).collect())
}
