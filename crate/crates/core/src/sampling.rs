//! Random test points.
//!
//! Uniform points in a high-dimensional ball almost never reach the regions
//! where the constructions do anything interesting (`⟨w̄, x⟩ ≈ 1/√d`), so the
//! checks draw from [`mixed_point`], which also places points near base
//! vectors and codewords.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::instances::{Distribution, FamilyKind, NormIndex};
use crate::linalg::{norm2, norm_p};

/// Uniform point in the Euclidean ball of the given radius.
pub fn uniform_in_l2_ball<R: Rng + ?Sized>(d: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = norm2(&x);
    let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
    x.iter_mut().for_each(|v| *v *= r / n);
    x
}

/// Point of `B_p(R)`: a Gaussian direction rescaled to unit `ℓ_p` norm, at
/// radius `R·U^{1/d}`. Uniform for `p = 2` only.
pub fn random_in_ball<R: Rng + ?Sized>(d: usize, p: NormIndex, radius: f64, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = norm_p(&x, p);
    let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
    x.iter_mut().for_each(|v| *v *= r / n);
    x
}

/// Scale `x` down onto `B_p(R)` if it lies outside.
pub fn pull_into_ball(x: &mut [f64], p: NormIndex, radius: f64) {
    let n = norm_p(x, p);
    if n > radius {
        let s = radius / n * (1.0 - 1e-12);
        x.iter_mut().for_each(|v| *v *= s);
    }
}

/// With probability 1/3 a point from [`random_in_ball`]; otherwise a scaled,
/// jittered copy of a random witness point (or of a codeword with a few
/// flipped signs, for the code family). Always inside the domain.
pub fn mixed_point<R: Rng + ?Sized>(dist: &Distribution, rng: &mut R) -> Vec<f64> {
    let d = dist.dim();
    let (p, radius) = dist.domain();
    if rng.gen_bool(1.0 / 3.0) {
        return random_in_ball(d, p, radius, rng);
    }
    let mut x = match dist.code() {
        Some(code) => {
            let message = crate::packing::SignVector::random(code.k(), rng);
            let mut word = code.encode(&message).expect("message has length k");
            for _ in 0..rng.gen_range(0..=code.r() + 1) {
                word.flip(rng.gen_range(0..d));
            }
            let t = rng.gen_range(0.95..=1.0);
            word.normalized().into_iter().map(|v| v * t).collect::<Vec<f64>>()
        }
        None => {
            let i = rng.gen_range(0..dist.base_len());
            let t = rng.gen_range(0.8..=1.0);
            dist.witness_point(i).expect("subset family").into_iter().map(|v| v * t).collect()
        }
    };
    let sigma = 0.05 / (d as f64).sqrt();
    for v in &mut x {
        *v += sigma * rng.sample::<f64, _>(StandardNormal);
    }
    pull_into_ball(&mut x, p, radius);
    x
}

/// Points of the region where the family's Lipschitz constant is certified.
/// For `l1reg` that is the unit ball around `1̄/√d` (half uniform, half
/// witness points pulled toward the center); every other family uses
/// [`mixed_point`] over its whole domain.
pub fn certified_region_point<R: Rng + ?Sized>(dist: &Distribution, rng: &mut R) -> Vec<f64> {
    if dist.kind() != FamilyKind::L1Reg {
        return mixed_point(dist, rng);
    }
    let d = dist.dim();
    let c = 1.0 / (d as f64).sqrt();
    if rng.gen_bool(0.5) {
        let mut u = uniform_in_l2_ball(d, 1.0, rng);
        u.iter_mut().for_each(|v| *v += c);
        return u;
    }
    let i = rng.gen_range(0..dist.base_len());
    let t = rng.gen_range(0.8..=1.0);
    dist.witness_point(i).expect("subset family").into_iter().map(|v| (v - c) * t + c).collect()
}
