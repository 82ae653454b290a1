//! `ermgap`: build packings, run seeded experiments, verify invariants.
//!
//! Exit codes: 0 success, 1 invariant or theorem-shaped check failed (or
//! I/O error), 2 usage error.

mod args;
mod output;

use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use ermgap_core::checks::{
    certified_points, codec_check, convexity_check, fast_eval_check, gradient_fd_check, lipschitz_check, mixed_points,
    non_interaction_check, population_mc_check, range_check, smoothness_check_pairs, CheckReport,
};
use ermgap_core::codes::BRUTE_FORCE_MAX_K;
use ermgap_core::experiments::{Experiment, ExperimentConfig, ExperimentReport, Mode};
use ermgap_core::packing::{build_packing_with_cap, verify_packing};
use ermgap_core::sampling::{mixed_point, pull_into_ball};
use ermgap_core::seed::{stream, StreamRng};
use ermgap_core::{Distribution, DistributionSpec, Error, FamilyKind};
use rand::Rng;

use args::{Cli, CodesArgs, Command, PackArgs, RunArgs, VerifyArgs};
use output::write_atomic;

enum Failure {
    Usage(String),
    Check(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Unsupported(_) | Error::LengthMismatch { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pack(a) => pack(a),
        Command::Run(a) => run(a, &argv),
        Command::Verify(a) => verify(a),
        Command::Codes(a) => codes(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nRun `ermgap --help` for usage.");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
        let seed = nanos as u64 ^ (nanos >> 64) as u64;
        eprintln!("seed: {seed}");
        seed
    })
}

fn emit(path: Option<&std::path::Path>, contents: &str) -> Result<(), Failure> {
    match path {
        Some(p) => Ok(write_atomic(p, contents.as_bytes())?),
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

fn pack(a: PackArgs) -> Result<(), Failure> {
    let seed = resolve_seed(a.seed);
    let cap = a.max_inner.unwrap_or(a.d as i64 / 2);
    let set = build_packing_with_cap(a.d, a.m, seed, cap)?;
    let report = verify_packing(&set);
    let json = serde_json::to_string(&set).expect("packing serializes");
    emit(a.out.as_deref(), &json)?;
    let worst = report.worst_inner.map_or("none".to_string(), |v| v.to_string());
    eprintln!("packing d={} m={} seed={seed} max_inner={cap} worst_inner={worst} valid={}", a.d, a.m, report.valid);
    if !report.valid {
        return Err(Failure::Check(format!("pair {:?} exceeds the cap", report.worst_pair)));
    }
    Ok(())
}

/// The family's lower-bound gap.
fn theorem_gap(dist: &Distribution) -> f64 {
    match dist.spec() {
        DistributionSpec::NonsmoothL2 { .. } | DistributionSpec::LpScaled { .. } => 0.25,
        DistributionSpec::Smooth { .. } | DistributionSpec::L1Reg { .. } => 1.0 / 128.0,
        DistributionSpec::ScaledAlpha { eps, .. } => *eps,
        DistributionSpec::CodeBased { .. } => {
            let code = dist.code().expect("code family");
            code.r() as f64 / (4.0 * code.d() as f64)
        }
        DistributionSpec::BoundedRange { .. } => 0.5,
    }
}

/// Command line with `argv[0]` normalized and the resolved seed filled in,
/// so that re-running it reproduces the report.
fn resolved_invocation(argv: &[String], seed: u64, seed_given: bool) -> Vec<String> {
    let mut out = vec!["ermgap".to_string()];
    out.extend(argv.iter().skip(1).cloned());
    if !seed_given {
        out.push("--seed".into());
        out.push(seed.to_string());
    }
    out
}

fn run(a: RunArgs, argv: &[String]) -> Result<(), Failure> {
    let seed = resolve_seed(a.seed);
    let spec = a.family.spec(seed).map_err(Failure::Usage)?;
    let dist = Distribution::new(spec.clone())?;
    let gap = match (a.gap, a.mode) {
        (Some(g), _) => g,
        (None, Mode::ErmGap) => theorem_gap(&dist),
        (None, _) => 0.1,
    };
    let config = ExperimentConfig {
        spec,
        n: a.n,
        trials: a.trials,
        master_seed: seed,
        gap_threshold: gap,
        mode: a.mode,
        parallel: a.parallel,
    };
    let experiment = Experiment::with_distribution(config, dist)?;
    let mut report = experiment.run()?;
    report.invocation = Some(resolved_invocation(argv, seed, a.seed.is_some()));
    if let Some(path) = &a.out {
        write_atomic(path, report.to_json().as_bytes())?;
    }
    if let Some(path) = &a.csv {
        write_atomic(path, report.to_csv_string().as_bytes())?;
    }
    print_summary(&report);
    theorem_check(&report)
}

fn print_summary(r: &ExperimentReport) {
    let c = &r.config;
    println!("family            {}", c.spec.kind());
    println!("mode              {}", c.mode);
    println!("n, trials, seed   {}, {}, {}", c.n, c.trials, c.master_seed);
    println!("gap threshold     {}", c.gap_threshold);
    println!("success frequency {:.4} ({}/{})", r.success_frequency, r.successes(), c.trials);
    match r.analytic_prediction {
        Some(p) => println!("analytic          {p:.4}"),
        None => println!("analytic          none"),
    }
    println!("wall time         {:.3}s", r.wall_time_secs);
}

/// Inside the theorem's regime (prediction at least 1/2) the frequency must
/// clear 1/2 minus four standard errors; a deterministic prediction must hold
/// in every trial. ERM trials that succeed must also verify, and the coverage
/// event must track its closed form within four standard errors.
fn theorem_check(r: &ExperimentReport) -> Result<(), Failure> {
    let c = &r.config;
    if c.mode == Mode::ErmGap {
        if let Some(t) = r.trials.iter().find(|t| t.succeeded && !t.verified) {
            return Err(Failure::Check(format!(
                "trial {} (seed {}) is not an empirical minimizer",
                t.trial_index, t.seed
            )));
        }
    }
    let Some(p) = r.analytic_prediction.filter(|_| c.mode != Mode::SgdContrast) else {
        return Ok(());
    };
    if let Some(freq) = r.coverage_failure_frequency {
        let band = 4.0 * (p * (1.0 - p) / c.trials as f64).sqrt();
        if (freq - p).abs() > band + 1e-12 {
            return Err(Failure::Check(format!(
                "coverage frequency {freq:.4} is outside {p:.4} ± {band:.4} (four standard errors)"
            )));
        }
    }
    if p >= 1.0 && r.success_frequency < 1.0 {
        let t = r.trials.iter().find(|t| !t.succeeded).expect("some trial failed");
        return Err(Failure::Check(format!(
            "deterministic bound missed in trial {} (seed {}): gap {}",
            t.trial_index, t.seed, t.gap
        )));
    }
    let floor = 0.5 - 4.0 * (0.25 / c.trials as f64).sqrt();
    if p >= 0.5 && r.success_frequency <= floor {
        return Err(Failure::Check(format!(
            "success frequency {:.4} not above 1/2 (guard {floor:.4}) although the prediction is {p:.4}",
            r.success_frequency
        )));
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let spec = a.family.spec(a.seed).map_err(Failure::Usage)?;
    let dist = Distribution::new(spec)?;
    let mut rng = stream(a.seed);
    let reports = batteries(&dist, a.cases.max(10), a.seed, &mut rng);
    println!("{:<44} {:>8} {:>8} {:>10}  status", "check", "cases", "failed", "exercised");
    for r in &reports {
        let status = if r.passed() { "pass" } else { "FAIL" };
        println!("{:<44} {:>8} {:>8} {:>10}  {status}", r.name, r.cases, r.failures, r.exercised);
    }
    if let Some(path) = &a.out {
        write_atomic(path, serde_json::to_string_pretty(&reports).expect("reports serialize").as_bytes())?;
    }
    match reports.iter().find(|r| !r.passed()) {
        Some(r) => Err(Failure::Check(format!("{}: {}", r.name, r.first_failure.as_deref().unwrap_or("no cases ran")))),
        None => Ok(()),
    }
}

fn batteries(dist: &Distribution, cases: usize, seed: u64, rng: &mut StreamRng) -> Vec<CheckReport> {
    let bound = dist.lipschitz_bound();
    let mixed = mixed_points(dist);
    let mut out = vec![convexity_check(dist, cases, 1e-9, &mixed, rng)];
    if !bound.unbounded {
        out.push(lipschitz_check(dist, bound.lipschitz, cases, 1e-9, &certified_points(dist), rng));
    }
    if let Some(sigma) = bound.smoothness {
        let (p, radius) = dist.domain();
        let pair = |rng: &mut StreamRng| {
            let x = mixed_point(dist, rng);
            let mut y: Vec<f64> = x.iter().map(|v| v + rng.gen_range(-0.02..0.02)).collect();
            pull_into_ball(&mut y, p, radius);
            (x, y)
        };
        out.push(smoothness_check_pairs(dist, sigma, cases, 1e-9, &pair, rng));
        out.push(gradient_fd_check(dist, cases / 10, 4, 2, 1e-6, 1e-5, &mixed, rng));
    }
    if matches!(dist.kind(), FamilyKind::Smooth | FamilyKind::BoundedRange) {
        out.push(non_interaction_check(dist, cases, &mixed, rng));
    }
    if dist.kind() == FamilyKind::BoundedRange {
        out.push(range_check(dist, 0.0, 1.0, cases * 10, 0.0, &mixed, rng));
    }
    if let Some(code) = dist.code() {
        out.push(codec_check(code, (cases / 10).max(1), rng));
        if code.k() <= BRUTE_FORCE_MAX_K {
            out.push(fast_eval_check(code, (cases / 10).max(1), 1e-12, &mixed, rng));
        }
    }
    out.push(population_mc_check(dist, 20, 20_000, 4.0, &mixed, seed));
    out
}

fn codes(a: CodesArgs) -> Result<(), Failure> {
    let params = a.code.build().params();
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&params).expect("params serialize"))
}
