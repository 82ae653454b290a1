//! Standing lower-bound assertions: with `n ≤ log₂ m − 1` the bad ERM wins
//! more than half of the time, and the code family wins every time for
//! `n ≤ k/2`.

use ermgap_core::experiments::{run_experiment, ExperimentConfig, Mode};
use ermgap_core::instances::PackingParams;
use ermgap_core::{CodePreset, DistributionSpec, NormIndex};

const TRIALS: usize = 120;

fn frequency(spec: DistributionSpec, n: usize, gap: f64) -> f64 {
    let report = run_experiment(&ExperimentConfig::new(spec, n, TRIALS, 2024, gap)).unwrap();
    assert!(report.trials.iter().all(|t| t.verified));
    let p = report.analytic_prediction.unwrap();
    let coverage = report.coverage_failure_frequency.unwrap();
    let band = 4.0 * (p * (1.0 - p) / TRIALS as f64).sqrt();
    assert!((coverage - p).abs() <= band + 1e-12, "coverage {coverage} vs {p} ± {band}");
    report.success_frequency
}

fn packing() -> PackingParams {
    PackingParams::new(96, 512, 3)
}

#[test]
fn nonsmooth_and_lp_families() {
    // log₂ 512 − 1 = 8
    assert!(frequency(DistributionSpec::NonsmoothL2 { packing: packing() }, 8, 0.25) > 0.5);
    for p in [NormIndex::L1, NormIndex::L2, NormIndex::Infinity] {
        assert!(frequency(DistributionSpec::LpScaled { packing: packing(), p }, 8, 0.25) > 0.5, "p = {p}");
    }
}

#[test]
fn smooth_and_l1reg_families() {
    assert!(frequency(DistributionSpec::Smooth { packing: packing() }, 8, 1.0 / 128.0) > 0.5);
    let lambda = 1.0 / 96f64.sqrt();
    assert!(frequency(DistributionSpec::L1Reg { packing: packing(), lambda }, 8, 1.0 / 128.0) > 0.5);
}

#[test]
fn bounded_range_family() {
    assert!(frequency(DistributionSpec::BoundedRange { m: 64 }, 5, 0.5) > 0.5);
}

#[test]
fn scaled_family() {
    let spec = DistributionSpec::ScaledAlpha { packing: packing(), lipschitz: 2.0, radius: 0.5, eps: 0.125 };
    // α = 1/4: (3/4)^n·512 ≥ 2 up to n = 19
    assert!(frequency(spec, 19, 0.125) > 0.5);
}

#[test]
fn code_family_is_deterministic() {
    let spec = DistributionSpec::CodeBased { code: CodePreset::Bch127_64 };
    assert_eq!(frequency(spec, 32, 10.0 / 508.0), 1.0);
    let spec = DistributionSpec::CodeBased { code: CodePreset::Bch15_7 };
    assert_eq!(frequency(spec, 3, 2.0 / 60.0), 1.0);
}

#[test]
fn sgd_gaps_shrink_with_more_samples() {
    let median = |n: usize, spec: DistributionSpec| {
        let cfg = ExperimentConfig::new(spec, n, 5, 31, 0.1).with_mode(Mode::SgdContrast).with_parallel(4);
        let mut gaps: Vec<f64> = run_experiment(&cfg).unwrap().trials.iter().map(|t| t.gap).collect();
        gaps.sort_by(f64::total_cmp);
        gaps[gaps.len() / 2]
    };
    let specs = [
        DistributionSpec::NonsmoothL2 { packing: PackingParams::new(120, 1024, 7) },
        DistributionSpec::Smooth { packing: PackingParams::new(120, 1024, 7) },
        DistributionSpec::L1Reg { packing: PackingParams::new(120, 1024, 7), lambda: 0.05 },
    ];
    for spec in specs {
        let small = median(400, spec.clone());
        let large = median(10_000, spec.clone());
        assert!(large <= small + 1e-12, "{}: {large} > {small}", spec.kind());
        assert!(small <= 0.1);
    }
}
