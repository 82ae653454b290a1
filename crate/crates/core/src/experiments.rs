//! Seeded Monte Carlo trials, reports and the closed-form predictions they
//! are compared against.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::erm::{adversarial_erm, empirical_value, sgd_baseline, verify_erm, SampleSet};
use crate::error::{invalid, Error, Result};
use crate::instances::{Distribution, DistributionSpec, FamilyKind};
use crate::seed::{derive, stream};

/// Slack applied when comparing a measured gap with its threshold.
pub const GAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Bad ERM selector; success means `gap ≥ gap_threshold`.
    ErmGap,
    /// Largest `|F_S(w̄) − F_D(w̄)|` over the base set; success means it
    /// reaches `gap_threshold`.
    UniformDeviation,
    /// Projected subgradient baseline; success means `gap ≤ gap_threshold`.
    SgdContrast,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::ErmGap => "erm-gap",
            Mode::UniformDeviation => "uniform-deviation",
            Mode::SgdContrast => "sgd-contrast",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Mode::ErmGap, Mode::UniformDeviation, Mode::SgdContrast]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid(format!("unknown mode '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub spec: DistributionSpec,
    pub n: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub gap_threshold: f64,
    pub mode: Mode,
    /// Worker threads; 0 or 1 runs the trials sequentially. Does not affect results.
    #[serde(default)]
    pub parallel: usize,
}

impl ExperimentConfig {
    pub fn new(spec: DistributionSpec, n: usize, trials: usize, master_seed: u64, gap_threshold: f64) -> Self {
        ExperimentConfig { spec, n, trials, master_seed, gap_threshold, mode: Mode::ErmGap, parallel: 0 }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_parallel(mut self, threads: usize) -> Self {
        self.parallel = threads;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if !self.gap_threshold.is_finite() || self.gap_threshold < 0.0 {
            return Err(invalid(format!("gap threshold must be finite and non-negative, got {}", self.gap_threshold)));
        }
        if self.mode != Mode::SgdContrast && self.gap_threshold == 0.0 {
            return Err(invalid(format!("gap threshold must be positive in {} mode", self.mode)));
        }
        if self.mode == Mode::UniformDeviation && self.spec.kind() != FamilyKind::NonsmoothL2 {
            return Err(invalid("the uniform-deviation experiment runs on the nonsmooth-l2 family"));
        }
        Ok(())
    }
}

/// One trial. `gap` holds the deviation in uniform-deviation mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    pub gap: f64,
    /// ERM mode: the selector found its bad point. Deviation mode: the
    /// threshold was reached. Baseline mode: always false.
    pub adversary_succeeded: bool,
    /// ERM mode: the selected point is an exact empirical minimizer.
    /// Deviation mode: the count formula agrees with direct evaluation at the
    /// maximizer. Baseline mode: the averaged iterate lies in the domain.
    pub verified: bool,
    /// Whether the trial meets the threshold in the mode's direction.
    pub succeeded: bool,
    /// Uncovered base index (ERM) or maximizing base index (deviation).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<usize>,
    /// Number of distinct sampled code indices `|I|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distinct_indices: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub ermgap_core: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    /// How trial seeds follow from the master seed.
    pub derivation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    /// Command line that produced the report, when run from the CLI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invocation: Option<Vec<String>>,
    pub versions: Versions,
    pub seeds: Seeds,
    pub spec_digest: String,
    pub trials: Vec<TrialRecord>,
    pub success_frequency: f64,
    pub analytic_prediction: Option<f64>,
    /// Fraction of ERM trials in which the selector found its bad point.
    pub coverage_failure_frequency: Option<f64>,
    pub wall_time_secs: f64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid(format!("bad report JSON: {e}")))
    }

    /// One row per trial: `trial_index, seed, gap, succeeded, verified`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trial_index", "seed", "gap", "succeeded", "verified"]).map_err(io)?;
        for t in &self.trials {
            w.serialize((t.trial_index, t.seed, t.gap, t.succeeded, t.verified)).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// Number of trials meeting the threshold.
    pub fn successes(&self) -> usize {
        self.trials.iter().filter(|t| t.succeeded).count()
    }
}

/// Outcome of one uniform-deviation trial.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationRecord {
    /// `max_w |F_S(w̄) − F_D(w̄)|`.
    pub max_deviation: f64,
    /// Smallest maximizing base index.
    pub argmax: usize,
    /// `count_w = #{i : w ∈ V_i}` for every base element.
    pub counts: Vec<usize>,
}

/// A distribution bound to a config; trials are pure functions of
/// `(config, trial_index)`.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    dist: Distribution,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let dist = Distribution::new(config.spec.clone())?;
        Ok(Experiment { config, dist })
    }

    /// Use an already built distribution, for instance one over a packing
    /// loaded from disk. The distribution's spec must equal the config's.
    pub fn with_distribution(config: ExperimentConfig, dist: Distribution) -> Result<Self> {
        config.validate()?;
        if dist.spec() != &config.spec {
            return Err(invalid("distribution does not match the config spec"));
        }
        Ok(Experiment { config, dist })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }

    pub fn trial_seed(&self, trial_index: usize) -> u64 {
        derive(self.config.master_seed, trial_index as u64)
    }

    pub fn run_trial(&self, trial_index: usize) -> Result<TrialRecord> {
        let seed = self.trial_seed(trial_index);
        let cfg = &self.config;
        let dist = &self.dist;
        let record = |gap, adversary_succeeded, verified, succeeded, witness, distinct_indices| TrialRecord {
            trial_index,
            seed,
            gap,
            adversary_succeeded,
            verified,
            succeeded,
            witness,
            distinct_indices,
        };
        Ok(match cfg.mode {
            Mode::ErmGap => {
                let set = SampleSet::draw(dist, cfg.n, seed)?;
                let out = adversarial_erm(dist, &set)?;
                let distinct = dist.code().map(|_| set.distinct_indices().len());
                record(
                    out.gap,
                    out.adversary_succeeded,
                    verify_erm(dist, &set, &out),
                    out.gap >= cfg.gap_threshold - GAP_TOL,
                    out.uncovered_index,
                    distinct,
                )
            }
            Mode::UniformDeviation => {
                let set = SampleSet::draw(dist, cfg.n, seed)?;
                let dev = uniform_deviation(dist, &set)?;
                let verified = check_deviation(dist, &set, &dev)?;
                let hit = dev.max_deviation >= cfg.gap_threshold - GAP_TOL;
                record(dev.max_deviation, hit, verified, hit, Some(dev.argmax), None)
            }
            Mode::SgdContrast => {
                let x = sgd_baseline(dist, cfg.n, &mut stream(seed))?;
                let verified = dist.check_domain(&x).is_ok();
                let gap = dist.population_objective(&x)? - dist.population_min();
                record(gap, false, verified, gap <= cfg.gap_threshold, None, None)
            }
        })
    }

    pub fn run(&self) -> Result<ExperimentReport> {
        let start = Instant::now();
        let cfg = &self.config;
        let trials: Vec<TrialRecord> = if cfg.parallel > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.parallel)
                .build()
                .map_err(|e| invalid(format!("thread pool: {e}")))?;
            pool.install(|| (0..cfg.trials).into_par_iter().map(|i| self.run_trial(i)).collect::<Result<_>>())?
        } else {
            (0..cfg.trials).map(|i| self.run_trial(i)).collect::<Result<_>>()?
        };
        let count = trials.iter().filter(|t| t.succeeded).count();
        let coverage_failure_frequency = (cfg.mode == Mode::ErmGap)
            .then(|| trials.iter().filter(|t| t.adversary_succeeded).count() as f64 / cfg.trials as f64);
        Ok(ExperimentReport {
            config: cfg.clone(),
            invocation: None,
            versions: Versions { ermgap_core: env!("CARGO_PKG_VERSION").to_string() },
            seeds: Seeds {
                master: cfg.master_seed,
                derivation: "trial seed = splitmix64(splitmix64(master) ^ index * 0xD1B54A32D192ED03); ChaCha8 stream"
                    .to_string(),
            },
            spec_digest: cfg.spec.digest(),
            success_frequency: count as f64 / cfg.trials as f64,
            analytic_prediction: self.analytic_prediction(),
            coverage_failure_frequency,
            trials,
            wall_time_secs: start.elapsed().as_secs_f64(),
        })
    }

    /// Closed-form success probability of one trial, where one is known.
    pub fn analytic_prediction(&self) -> Option<f64> {
        let cfg = &self.config;
        let dist = &self.dist;
        match cfg.mode {
            Mode::ErmGap => match dist.code() {
                Some(code) => {
                    let bound = code.r() as f64 / (4.0 * code.d() as f64);
                    (2 * cfg.n <= code.k() && cfg.gap_threshold <= bound + GAP_TOL).then_some(1.0)
                }
                None => Some(coverage_probability(dist.base_len(), cfg.n, dist.alpha())),
            },
            Mode::UniformDeviation => Some(deviation_probability(dist.base_len(), cfg.n, cfg.gap_threshold)),
            Mode::SgdContrast => None,
        }
    }
}

/// Build the distribution and run every trial.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    Experiment::new(config.clone())?.run()
}

/// Single trial of `config`, rebuilding the distribution.
pub fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<TrialRecord> {
    Experiment::new(config.clone())?.run_trial(trial_index)
}

/// Baseline runs on the same distribution; success means `gap ≤ gap_threshold`.
pub fn sgd_contrast(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment(&config.clone().with_mode(Mode::SgdContrast))
}

/// `Pr[∪V_i ≠ W] = 1 − (1 − (1−α)^n)^m` for `n` independent subsets of an
/// `m`-element base set, each element kept with probability `α`.
pub fn coverage_probability(m: usize, n: usize, alpha: f64) -> f64 {
    let miss_one = (1.0 - alpha).powi(n as i32);
    // 1 − (1 − q)^m without cancellation for small q
    -(m as f64 * (-miss_one).ln_1p()).exp_m1()
}

/// Probability that `max_w |count_w/n − 1/2| / 2 ≥ threshold` when the
/// `m` counts are independent `Bin(n, 1/2)`.
pub fn deviation_probability(m: usize, n: usize, threshold: f64) -> f64 {
    let per_vector = deviation_tail(n, threshold);
    -(m as f64 * (-per_vector).ln_1p()).exp_m1()
}

/// `P[|X − n/2| ≥ 2·threshold·n]` for `X ∼ Bin(n, 1/2)`.
pub fn deviation_tail(n: usize, threshold: f64) -> f64 {
    let bin = Binomial::new(0.5, n as u64).expect("valid binomial");
    let half = n as f64 / 2.0;
    let reach = 2.0 * threshold * n as f64;
    let hi = (half + reach - GAP_TOL).ceil();
    let lo = (half - reach + GAP_TOL).floor();
    let upper = if hi > n as f64 { 0.0 } else { 1.0 - if hi <= 0.0 { 0.0 } else { bin.cdf(hi as u64 - 1) } };
    let lower = if lo < 0.0 { 0.0 } else { bin.cdf(lo as u64) };
    (upper + lower).min(1.0)
}

/// `max_w |F_S(w̄) − F_D(w̄)|` for the nonsmooth family, from per-vector
/// inclusion counts via `F_S(w̄) − F_D(w̄) = (count_w/n − 1/2)/2`.
pub fn uniform_deviation(dist: &Distribution, set: &SampleSet) -> Result<DeviationRecord> {
    if dist.kind() != FamilyKind::NonsmoothL2 {
        return Err(invalid("uniform deviation is defined for the nonsmooth-l2 family"));
    }
    let m = dist.base_len();
    let mut counts = vec![0usize; m];
    for s in &set.samples {
        for i in s.mask().expect("subset family").iter_ones() {
            counts[i] += 1;
        }
    }
    let n = set.len() as f64;
    let (argmax, max_deviation) = counts
        .iter()
        .map(|&c| (c as f64 / n - 0.5).abs() / 2.0)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    Ok(DeviationRecord { max_deviation, argmax, counts })
}

/// Recompute the deviation at the maximizer by direct evaluation.
fn check_deviation(dist: &Distribution, set: &SampleSet, dev: &DeviationRecord) -> Result<bool> {
    let x = dist.witness_point(dev.argmax).expect("subset family");
    let direct = (empirical_value(dist, set, &x)? - dist.population_value(&x)?).abs();
    Ok((direct - dev.max_deviation).abs() <= 1e-12)
}
