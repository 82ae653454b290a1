//! Invariant batteries: each draws random cases, counts violations, and
//! records the worst excess over the allowed bound.
//!
//! Points come from a caller-supplied generator so a battery can be run on
//! uniform ball points, on [`crate::sampling::mixed_point`], or on a
//! restricted working region.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codes::BchCode;
use crate::experiments::coverage_probability;
use crate::instances::{Distribution, FunctionSample, NormIndex};
use crate::linalg::{dist2, dot, norm_p};
use crate::mask::Mask;
use crate::packing::SignVector;
use crate::seed::{derive, stream, StreamRng};

/// Point generator used by the batteries.
pub type PointGen<'a> = &'a (dyn Fn(&mut StreamRng) -> Vec<f64> + Sync);
/// Generator of correlated point pairs.
pub type PairGen<'a> = &'a dyn Fn(&mut StreamRng) -> (Vec<f64>, Vec<f64>);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest `lhs − bound` seen (negative when every case had slack).
    pub worst_excess: f64,
    /// Cases that reached a non-trivial branch (active component, decoded
    /// codeword above the floor, and so on).
    pub exercised: usize,
    /// Inputs of the first violating case, for reproduction.
    pub first_failure: Option<String>,
}

impl CheckReport {
    fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            cases: 0,
            failures: 0,
            worst_excess: f64::NEG_INFINITY,
            exercised: 0,
            first_failure: None,
        }
    }

    fn record(&mut self, lhs: f64, bound: f64, exercised: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        let excess = lhs - bound;
        if excess.is_nan() || excess > 0.0 {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(format!("lhs {lhs} > bound {bound}: {}", describe()));
            }
        }
        if excess > self.worst_excess || excess.is_nan() {
            self.worst_excess = excess;
        }
        if exercised {
            self.exercised += 1;
        }
    }

    fn merge(mut self, other: CheckReport) -> Self {
        self.cases += other.cases;
        self.failures += other.failures;
        self.exercised += other.exercised;
        self.first_failure = self.first_failure.or(other.first_failure);
        if other.worst_excess > self.worst_excess || other.worst_excess.is_nan() {
            self.worst_excess = other.worst_excess;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }
}

fn points_json(points: &[&[f64]]) -> String {
    serde_json::to_string(points).expect("finite points serialize")
}

fn case(f: &FunctionSample, points: &[&[f64]]) -> String {
    format!("sample {}, points {}", serde_json::to_string(f).expect("sample serializes"), points_json(points))
}

/// `|f(x) − f(y)| ≤ L‖x − y‖ + tol` in the family's Lipschitz norm, one
/// fresh function per pair.
pub fn lipschitz_check(
    dist: &Distribution,
    lipschitz: f64,
    pairs: usize,
    tol: f64,
    points: PointGen,
    rng: &mut StreamRng,
) -> CheckReport {
    let norm = dist.lipschitz_bound().norm;
    let mut report = CheckReport::new(format!("lipschitz {}", dist.kind()));
    for _ in 0..pairs {
        let f = dist.sample_function(rng);
        let x = points(rng);
        let y = points(rng);
        let fx = dist.value(&f, &x).expect("in-domain point");
        let fy = dist.value(&f, &y).expect("in-domain point");
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let active = dist.subgradient(&f, &x).expect("in-domain point").iter().any(|&g| g != 0.0);
        report.record((fx - fy).abs(), lipschitz * norm_p(&diff, norm) + tol, active, || case(&f, &[&x, &y]));
    }
    report
}

/// `‖∇f(x) − ∇f(y)‖₂ ≤ σ‖x − y‖₂ + tol`.
pub fn smoothness_check(
    dist: &Distribution,
    sigma: f64,
    pairs: usize,
    tol: f64,
    points: PointGen,
    rng: &mut StreamRng,
) -> CheckReport {
    smoothness_check_pairs(dist, sigma, pairs, tol, &|rng: &mut StreamRng| (points(rng), points(rng)), rng)
}

/// [`smoothness_check`] with a generator of correlated pairs.
pub fn smoothness_check_pairs(
    dist: &Distribution,
    sigma: f64,
    pairs: usize,
    tol: f64,
    pair_gen: PairGen,
    rng: &mut StreamRng,
) -> CheckReport {
    let mut report = CheckReport::new(format!("smoothness {}", dist.kind()));
    for _ in 0..pairs {
        let f = dist.sample_function(rng);
        let (x, y) = pair_gen(rng);
        let gx = dist.subgradient(&f, &x).expect("in-domain point");
        let gy = dist.subgradient(&f, &y).expect("in-domain point");
        let active = gx.iter().chain(&gy).any(|&g| g != 0.0);
        report.record(dist2(&gx, &gy), sigma * dist2(&x, &y) + tol, active, || case(&f, &[&x, &y]));
    }
    report
}

/// Largest observed `‖∇f(x) − ∇f(y)‖ / ‖x − y‖` over the given pairs.
pub fn max_gradient_ratio(dist: &Distribution, pairs: usize, pair_gen: PairGen, rng: &mut StreamRng) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let f = dist.sample_function(rng);
        let (x, y) = pair_gen(rng);
        let gx = dist.subgradient(&f, &x).expect("in-domain point");
        let gy = dist.subgradient(&f, &y).expect("in-domain point");
        let gap = dist2(&x, &y);
        if gap > 0.0 {
            worst = worst.max(dist2(&gx, &gy) / gap);
        }
    }
    worst
}

/// Gradient against central differences with step `h`: `coords` random
/// coordinate directions and `directions` random unit directions per point.
/// Points are shrunk to radius `R(1 − 4h)` so both probes stay in the domain.
#[allow(clippy::too_many_arguments)]
pub fn gradient_fd_check(
    dist: &Distribution,
    n_points: usize,
    coords: usize,
    directions: usize,
    h: f64,
    tol: f64,
    points: PointGen,
    rng: &mut StreamRng,
) -> CheckReport {
    let d = dist.dim();
    let (p, radius) = dist.domain();
    let mut report = CheckReport::new(format!("finite differences {}", dist.kind()));
    for _ in 0..n_points {
        let f = dist.sample_function(rng);
        let mut x = points(rng);
        let n = norm_p(&x, p);
        let shrink = if n > radius * (1.0 - 4.0 * h) { radius * (1.0 - 4.0 * h) / n } else { 1.0 };
        x.iter_mut().for_each(|v| *v *= shrink);
        let g = dist.subgradient(&f, &x).expect("in-domain point");
        let active = g.iter().any(|&v| v != 0.0);
        let mut dirs: Vec<Vec<f64>> = sample_indices(rng, d, coords.min(d))
            .into_iter()
            .map(|k| {
                let mut e = vec![0.0; d];
                e[k] = 1.0;
                e
            })
            .collect();
        for _ in 0..directions {
            let mut u: Vec<f64> = (0..d).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            let un = crate::linalg::norm2(&u);
            u.iter_mut().for_each(|v| *v /= un);
            dirs.push(u);
        }
        for u in dirs {
            let plus: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + h * b).collect();
            let minus: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a - h * b).collect();
            let fd =
                (dist.value(&f, &plus).expect("in domain") - dist.value(&f, &minus).expect("in domain")) / (2.0 * h);
            report.record((fd - dot(&g, &u)).abs(), tol, active, || case(&f, &[&x, &u]));
        }
    }
    report
}

/// Subgradient inequality `f(y) ≥ f(x) + ⟨g(x), y − x⟩ − tol`.
pub fn convexity_check(
    dist: &Distribution,
    pairs: usize,
    tol: f64,
    points: PointGen,
    rng: &mut StreamRng,
) -> CheckReport {
    let mut report = CheckReport::new(format!("convexity {}", dist.kind()));
    for _ in 0..pairs {
        let f = dist.sample_function(rng);
        let x = points(rng);
        let y = points(rng);
        let fx = dist.value(&f, &x).expect("in domain");
        let fy = dist.value(&f, &y).expect("in domain");
        let g = dist.subgradient(&f, &x).expect("in domain");
        let diff: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let active = g.iter().any(|&v| v != 0.0);
        report.record(fx + dot(&g, &diff), fy + tol, active, || case(&f, &[&x, &y]));
    }
    report
}

/// `lo − tol ≤ f(x) ≤ hi + tol` for random `(f, x)`.
pub fn range_check(
    dist: &Distribution,
    lo: f64,
    hi: f64,
    cases: usize,
    tol: f64,
    points: PointGen,
    rng: &mut StreamRng,
) -> CheckReport {
    let mut report = CheckReport::new(format!("range {}", dist.kind()));
    for _ in 0..cases {
        let f = dist.sample_function(rng);
        let x = points(rng);
        let v = dist.value(&f, &x).expect("in domain");
        let excess = (v - hi).max(lo - v);
        report.record(excess, tol, v > lo, || case(&f, &[&x]));
    }
    report
}

/// At most one component active at every point (smooth, l1reg and
/// bounded-range families). `worst_excess` is the largest active count minus 1.
pub fn non_interaction_check(
    dist: &Distribution,
    n_points: usize,
    points: PointGen,
    rng: &mut StreamRng,
) -> CheckReport {
    let mut report = CheckReport::new(format!("non-interaction {}", dist.kind()));
    for _ in 0..n_points {
        let x = points(rng);
        let active = dist.active_components(&x).len();
        report.record(active as f64, 1.0, active > 0, || points_json(&[&x]));
    }
    report
}

/// Encode a random message, flip `w` distinct coordinates, decode; for every
/// error weight `w = 0..=r`, `per_weight` times.
pub fn codec_check(code: &BchCode, per_weight: usize, rng: &mut StreamRng) -> CheckReport {
    let mut report = CheckReport::new(format!("codec d={} k={} r={}", code.d(), code.k(), code.r()));
    for weight in 0..=code.r() {
        for _ in 0..per_weight {
            let z = SignVector::random(code.k(), rng);
            let mut y = code.encode(&z).expect("message length k");
            for i in sample_indices(rng, code.d(), weight) {
                y.flip(i);
            }
            let ok = matches!(code.decode(&y), Ok(Some(ref back)) if back == &z);
            report.record(if ok { 0.0 } else { 1.0 }, 0.0, weight > 0, || {
                format!("weight {weight}, message {:?}", z.entries())
            });
        }
    }
    report
}

/// `gj_value_fast` against `gj_value_bruteforce` for every `j` at each point.
pub fn fast_eval_check(
    code: &BchCode,
    n_points: usize,
    tol: f64,
    points: PointGen,
    rng: &mut StreamRng,
) -> CheckReport {
    let mut report = CheckReport::new(format!("fast evaluation d={} k={}", code.d(), code.k()));
    for _ in 0..n_points {
        let x = points(rng);
        let fast = code.all_values(&x).expect("in domain");
        for (j, &fj) in fast.iter().enumerate() {
            let slow = code.gj_value_bruteforce(j, &x).expect("small code");
            let single = code.gj_value_fast(j, &x).expect("in domain");
            let err = (fj - slow).abs().max((single - slow).abs());
            report.record(err, tol, slow > code.floor_value(), || format!("j {j}, {}", points_json(&[&x])));
        }
    }
    report
}

/// Exact `F_D(x)` against a Monte Carlo mean of `samples` member values at
/// each of `n_points` points; a case fails when the difference exceeds
/// `z` standard errors (plus `1e-12` for zero-variance points). Points run
/// in parallel, each on its own stream derived from `seed`.
pub fn population_mc_check(
    dist: &Distribution,
    n_points: usize,
    samples: usize,
    z: f64,
    points: PointGen,
    seed: u64,
) -> CheckReport {
    let name = format!("population value vs monte carlo {}", dist.kind());
    (0..n_points)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(derive(seed, i as u64));
            let x = points(&mut rng);
            let exact = dist.population_value(&x).expect("in domain");
            let prepared = dist.prepare(&x).expect("in domain");
            // shifted sums: exact when every draw returns the same value
            let shift = dist.value_prepared(&dist.sample_function(&mut rng), &prepared);
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 1..samples {
                let v = dist.value_prepared(&dist.sample_function(&mut rng), &prepared) - shift;
                sum += v;
                sum_sq += v * v;
            }
            let n = samples as f64;
            let mean = shift + sum / n;
            let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
            let se = (var / n).sqrt();
            let mut r = CheckReport::new(name.clone());
            r.record((mean - exact).abs(), z * se + 1e-12, var > 0.0, || format!("stream {i}, {}", points_json(&[&x])));
            r
        })
        .reduce(|| CheckReport::new(name.clone()), CheckReport::merge)
}

/// Simulated frequency of `∪V_i ≠ W` over `runs` runs and its closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageSimulation {
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
    pub runs: usize,
    pub frequency: f64,
    pub predicted: f64,
    pub standard_error: f64,
}

impl CoverageSimulation {
    pub fn within(&self, z: f64) -> bool {
        (self.frequency - self.predicted).abs() <= z * self.standard_error
    }
}

pub fn simulate_coverage(m: usize, n: usize, alpha: f64, runs: usize, seed: u64) -> CoverageSimulation {
    let misses: usize = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = stream(derive(seed, run as u64));
            let mut union = Mask::empty(m);
            for _ in 0..n {
                union.union_with(&Mask::bernoulli(m, alpha, &mut rng));
            }
            usize::from(union.first_zero().is_some())
        })
        .sum();
    let predicted = coverage_probability(m, n, alpha);
    CoverageSimulation {
        m,
        n,
        alpha,
        runs,
        frequency: misses as f64 / runs as f64,
        predicted,
        standard_error: (predicted * (1.0 - predicted) / runs as f64).sqrt(),
    }
}

/// Uniform points of the family's domain ball (radially rescaled for p ≠ 2).
pub fn ball_points(dist: &Distribution) -> impl Fn(&mut StreamRng) -> Vec<f64> + Sync + '_ {
    let (p, radius) = dist.domain();
    let d = dist.dim();
    move |rng: &mut StreamRng| match p {
        NormIndex::Finite(2.0) => crate::sampling::uniform_in_l2_ball(d, radius, rng),
        _ => crate::sampling::random_in_ball(d, p, radius, rng),
    }
}

/// [`crate::sampling::certified_region_point`] bound to a distribution.
pub fn certified_points(dist: &Distribution) -> impl Fn(&mut StreamRng) -> Vec<f64> + Sync + '_ {
    move |rng: &mut StreamRng| crate::sampling::certified_region_point(dist, rng)
}

/// [`crate::sampling::mixed_point`] bound to a distribution.
pub fn mixed_points(dist: &Distribution) -> impl Fn(&mut StreamRng) -> Vec<f64> + Sync + '_ {
    move |rng: &mut StreamRng| crate::sampling::mixed_point(dist, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::CodePreset;
    use crate::instances::{DistributionSpec, PackingParams};

    #[test]
    fn report_bookkeeping() {
        let mut r = CheckReport::new("t");
        assert!(!r.passed());
        r.record(0.5, 1.0, true, String::new);
        assert!(r.passed());
        r.record(2.0, 1.0, false, || "x".into());
        assert_eq!((r.cases, r.failures, r.exercised), (2, 1, 1));
        assert_eq!(r.worst_excess, 1.0);
        assert_eq!(r.first_failure.as_deref(), Some("lhs 2 > bound 1: x"));
        r.record(f64::NAN, 1.0, false, String::new);
        assert_eq!(r.failures, 2);
    }

    #[test]
    fn small_batteries_pass() {
        let mut rng = stream(1);
        let dist = Distribution::new(DistributionSpec::NonsmoothL2 { packing: PackingParams::new(36, 64, 1) }).unwrap();
        let pts = mixed_points(&dist);
        assert!(lipschitz_check(&dist, 1.0, 300, 1e-9, &pts, &mut rng).passed());
        assert!(convexity_check(&dist, 300, 1e-9, &pts, &mut rng).passed());

        let code = CodePreset::Bch15_7.build();
        assert!(codec_check(&code, 20, &mut rng).passed());
    }

    #[test]
    fn wrong_constant_is_caught() {
        let mut rng = stream(2);
        let dist = Distribution::new(DistributionSpec::Smooth { packing: PackingParams::new(36, 64, 1) }).unwrap();
        let pair = |rng: &mut StreamRng| {
            let i = rng.gen_range(0..64);
            let w = dist.witness_point(i).unwrap();
            let y: Vec<f64> = w.iter().map(|v| v * 0.9).collect();
            (w, y)
        };
        let loose = smoothness_check_pairs(&dist, 0.5, 200, 1e-9, &pair, &mut rng);
        assert!(loose.failures > 0);
        assert!(smoothness_check_pairs(&dist, 2.0, 200, 1e-9, &pair, &mut rng).passed());
    }

    #[test]
    fn coverage_simulation_small() {
        let sim = simulate_coverage(64, 5, 0.5, 4000, 3);
        assert!(sim.within(4.0), "{sim:?}");
    }
}
