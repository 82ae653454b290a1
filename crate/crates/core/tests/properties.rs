use ermgap_core::checks::{certified_points, convexity_check, lipschitz_check, mixed_points, non_interaction_check};
use ermgap_core::erm::{adversarial_erm, project, sgd_baseline, verify_erm, SampleSet};
use ermgap_core::experiments::{run_experiment, ExperimentConfig};
use ermgap_core::instances::PackingParams;
use ermgap_core::linalg::{dist2, norm2, norm_p};
use ermgap_core::sampling::mixed_point;
use ermgap_core::seed::stream;
use ermgap_core::{CodePreset, Distribution, DistributionSpec, FunctionSample, Mask, NormIndex};
use proptest::prelude::*;
use rand::Rng;

fn all_specs() -> Vec<DistributionSpec> {
    let pk = || PackingParams::new(48, 128, 21);
    vec![
        DistributionSpec::NonsmoothL2 { packing: pk() },
        DistributionSpec::LpScaled { packing: pk(), p: NormIndex::L1 },
        DistributionSpec::LpScaled { packing: pk(), p: NormIndex::Infinity },
        DistributionSpec::LpScaled { packing: pk(), p: NormIndex::Finite(3.0) },
        DistributionSpec::Smooth { packing: pk() },
        DistributionSpec::L1Reg { packing: pk(), lambda: 0.1 },
        DistributionSpec::ScaledAlpha { packing: pk(), lipschitz: 3.0, radius: 0.5, eps: 0.1875 },
        DistributionSpec::CodeBased { code: CodePreset::Bch15_7 },
        DistributionSpec::CodeBased { code: CodePreset::Bch127_64 },
        DistributionSpec::BoundedRange { m: 32 },
    ]
}

fn vec_strategy() -> impl Strategy<Value = Vec<f64>> {
    (1usize..12).prop_flat_map(|d| prop::collection::vec(-3.0f64..3.0, d))
}

proptest! {
    #[test]
    fn projection_is_idempotent_and_inside(x in vec_strategy(), r in 0.1f64..2.0) {
        for p in [NormIndex::L1, NormIndex::L2, NormIndex::Infinity] {
            let px = project(&x, p, r).unwrap();
            prop_assert!(norm_p(&px, p) <= r * (1.0 + 1e-12));
            let ppx = project(&px, p, r).unwrap();
            prop_assert!(dist2(&px, &ppx) <= 1e-12);
        }
    }

    #[test]
    fn projection_is_non_expansive(
        pair in (1usize..12).prop_flat_map(|d| (prop::collection::vec(-3.0f64..3.0, d), prop::collection::vec(-3.0f64..3.0, d))),
    ) {
        let (x, y) = pair;
        for p in [NormIndex::L1, NormIndex::L2, NormIndex::Infinity] {
            let px = project(&x, p, 1.0).unwrap();
            let py = project(&y, p, 1.0).unwrap();
            prop_assert!(dist2(&px, &py) <= dist2(&x, &y) + 1e-9);
        }
    }

    #[test]
    fn l1_projection_beats_random_feasible_points(x in vec_strategy(), seed in any::<u64>()) {
        let px = project(&x, NormIndex::L1, 1.0).unwrap();
        let mut rng = stream(seed);
        for _ in 0..50 {
            let mut y: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = norm_p(&y, NormIndex::L1);
            if n > 1.0 {
                y.iter_mut().for_each(|v| *v /= n);
            }
            prop_assert!(dist2(&x, &px) <= dist2(&x, &y) + 1e-12);
        }
    }

    #[test]
    fn coverage_event_matches_direct_union(seed in any::<u64>(), n in 1usize..8) {
        let dist = Distribution::new(DistributionSpec::NonsmoothL2 { packing: PackingParams::new(36, 64, 1) }).unwrap();
        let set = SampleSet::draw(&dist, n, seed).unwrap();
        let mut covered = [false; 64];
        for s in &set.samples {
            for (i, c) in covered.iter_mut().enumerate() {
                *c |= s.mask().unwrap().get(i);
            }
        }
        let out = adversarial_erm(&dist, &set).unwrap();
        prop_assert_eq!(out.adversary_succeeded, covered.iter().any(|c| !c));
        prop_assert_eq!(out.uncovered_index, covered.iter().position(|c| !c));
    }
}

#[test]
fn adversary_success_implies_verified_minimizer() {
    for spec in all_specs() {
        let dist = Distribution::new(spec).unwrap();
        for seed in 0..40u64 {
            let n = 1 + (seed as usize % 4);
            let set = SampleSet::draw(&dist, n, seed).unwrap();
            let out = adversarial_erm(&dist, &set).unwrap();
            assert!(out.gap >= -1e-9, "{}: gap {}", dist.kind(), out.gap);
            if out.adversary_succeeded {
                assert!(verify_erm(&dist, &set, &out), "{} seed {seed}", dist.kind());
            }
        }
    }
}

#[test]
fn population_objective_never_below_minimum() {
    let mut rng = stream(8);
    for spec in all_specs() {
        let dist = Distribution::new(spec).unwrap();
        for _ in 0..300 {
            let x = mixed_point(&dist, &mut rng);
            let v = dist.population_objective(&x).unwrap();
            assert!(v >= dist.population_min() - 1e-12, "{}: {v}", dist.kind());
        }
    }
}

#[test]
fn every_family_is_convex_on_mixed_points() {
    let mut rng = stream(9);
    for spec in all_specs() {
        let dist = Distribution::new(spec).unwrap();
        let report = convexity_check(&dist, 2_000, 1e-9, &mixed_points(&dist), &mut rng);
        assert!(report.passed(), "{report:?}");
        assert!(report.exercised > 0, "{report:?}");
    }
}

#[test]
fn lipschitz_constants_hold_on_their_regions() {
    let mut rng = stream(10);
    for spec in all_specs() {
        let dist = Distribution::new(spec).unwrap();
        let bound = dist.lipschitz_bound();
        if bound.unbounded {
            continue;
        }
        let report = lipschitz_check(&dist, bound.lipschitz, 3_000, 1e-9, &certified_points(&dist), &mut rng);
        assert!(report.passed(), "{report:?}");
    }
}

#[test]
fn l1reg_constant_fails_at_the_edge_of_its_domain() {
    let d = 48;
    let lambda = 1.0 / (d as f64).sqrt();
    let dist = Distribution::new(DistributionSpec::L1Reg { packing: PackingParams::new(d, 128, 21), lambda }).unwrap();
    let set = dist.packed_set().unwrap();
    let i = (0..set.len()).find(|&i| set.get(i).entries().iter().map(|&e| e as i32).sum::<i32>() <= 0).unwrap();
    let f = FunctionSample::subset(dist.kind(), Mask::from_indices(set.len(), [i]));
    let x: Vec<f64> = set.get(i).normalized().iter().map(|v| 2.0 * v).collect();
    dist.check_domain(&x).unwrap();
    let g = dist.subgradient(&f, &x).unwrap();
    assert!(norm2(&g) > 2.4, "gradient norm {}", norm2(&g));
    let t = 1e-6;
    let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - t * b / norm2(&g)).collect();
    dist.check_domain(&y).unwrap();
    let ratio = (dist.value(&f, &x).unwrap() - dist.value(&f, &y).unwrap()) / t;
    assert!(ratio > 2.25);
}

#[test]
fn components_do_not_interact() {
    let mut rng = stream(11);
    for spec in all_specs() {
        let dist = Distribution::new(spec).unwrap();
        if !matches!(dist.spec(), DistributionSpec::Smooth { .. } | DistributionSpec::BoundedRange { .. }) {
            continue;
        }
        let report = non_interaction_check(&dist, 5_000, &mixed_points(&dist), &mut rng);
        assert!(report.passed() && report.exercised > 0, "{report:?}");
    }
}

#[test]
fn sgd_baseline_is_deterministic_per_seed() {
    for spec in all_specs() {
        let dist = Distribution::new(spec).unwrap();
        if dist.lipschitz_bound().unbounded {
            continue;
        }
        if let DistributionSpec::LpScaled { p: NormIndex::Finite(q), .. } = dist.spec() {
            if *q == 3.0 {
                assert!(sgd_baseline(&dist, 5, &mut stream(1)).is_err());
                continue;
            }
        }
        let a = sgd_baseline(&dist, 30, &mut stream(4)).unwrap();
        let b = sgd_baseline(&dist, 30, &mut stream(4)).unwrap();
        assert_eq!(a, b);
        dist.check_domain(&a).unwrap();
    }
}

#[test]
fn sgd_single_empty_sample_keeps_origin() {
    let dist = Distribution::new(DistributionSpec::NonsmoothL2 { packing: PackingParams::new(36, 64, 1) }).unwrap();
    let x = sgd_baseline(&dist, 1, &mut stream(2)).unwrap();
    assert!(x.iter().all(|&v| v == 0.0));
}

#[test]
fn identical_configs_give_identical_reports() {
    for spec in all_specs() {
        let threshold = match &spec {
            DistributionSpec::CodeBased { .. } => 0.01,
            _ => 1e-3,
        };
        let cfg = ExperimentConfig::new(spec, 3, 12, 99, threshold);
        let mut a = run_experiment(&cfg).unwrap();
        let mut b = run_experiment(&cfg.clone().with_parallel(3)).unwrap();
        a.wall_time_secs = 0.0;
        b.wall_time_secs = 0.0;
        b.config.parallel = 0;
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_csv_string(), b.to_csv_string());
    }
}
