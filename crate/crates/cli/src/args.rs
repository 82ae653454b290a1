use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ermgap_core::experiments::Mode;
use ermgap_core::instances::PackingParams;
use ermgap_core::{CodePreset, DistributionSpec, FamilyKind, NormIndex};

#[derive(Debug, Parser)]
#[command(name = "ermgap", version, about = "Bad-ERM generalization gap laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a random sign-vector packing and write it as JSON.
    Pack(PackArgs),
    /// Run a seeded Monte Carlo experiment.
    Run(RunArgs),
    /// Run the invariant batteries for one family.
    Verify(VerifyArgs),
    /// Print the parameters of a code preset.
    Codes(CodesArgs),
}

/// Flags shared by everything that builds a distribution.
#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// nonsmooth-l2, lp, smooth, l1reg, scaled, code or bounded-range.
    #[arg(long)]
    pub family: FamilyKind,
    #[arg(long, default_value_t = 120)]
    pub d: usize,
    /// Base-set size; defaults to 1024 (64 for bounded-range).
    #[arg(long)]
    pub m: Option<usize>,
    /// Norm index of the lp family: a number >= 1 or "inf".
    #[arg(long)]
    pub p: Option<NormIndex>,
    /// Regularization weight of l1reg; defaults to 1/sqrt(d).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Gap of the scaled family.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Lipschitz constant of the scaled family.
    #[arg(long = "L", default_value_t = 1.0)]
    pub lipschitz: f64,
    /// Domain radius of the scaled family.
    #[arg(long = "R", default_value_t = 1.0)]
    pub radius: f64,
    /// Code preset of the code family: 15-7 or 127-64.
    #[arg(long, default_value = "127-64")]
    pub code: CodePreset,
    /// Seed of the packing; defaults to --seed.
    #[arg(long)]
    pub packing_seed: Option<u64>,
}

impl FamilyArgs {
    pub fn spec(&self, seed: u64) -> Result<DistributionSpec, String> {
        let default_m = if self.family == FamilyKind::BoundedRange { 64 } else { 1024 };
        let m = self.m.unwrap_or(default_m);
        let packing = PackingParams::new(self.d, m, self.packing_seed.unwrap_or(seed));
        Ok(match self.family {
            FamilyKind::NonsmoothL2 => DistributionSpec::NonsmoothL2 { packing },
            FamilyKind::LpScaled => {
                let p = self.p.ok_or("--family lp needs --p")?;
                DistributionSpec::LpScaled { packing, p }
            }
            FamilyKind::Smooth => DistributionSpec::Smooth { packing },
            FamilyKind::L1Reg => {
                let lambda = self.lambda.unwrap_or(1.0 / (self.d as f64).sqrt());
                DistributionSpec::L1Reg { packing, lambda }
            }
            FamilyKind::ScaledAlpha => {
                let eps = self.eps.ok_or("--family scaled needs --eps")?;
                DistributionSpec::ScaledAlpha { packing, lipschitz: self.lipschitz, radius: self.radius, eps }
            }
            FamilyKind::CodeBased => DistributionSpec::CodeBased { code: self.code },
            FamilyKind::BoundedRange => DistributionSpec::BoundedRange { m },
        })
    }
}

#[derive(Debug, Args)]
pub struct PackArgs {
    #[arg(long, default_value_t = 120)]
    pub d: usize,
    #[arg(long, default_value_t = 1024)]
    pub m: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Pairwise inner-product cap; defaults to d/2.
    #[arg(long)]
    pub max_inner: Option<i64>,
    /// Output JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Samples per trial.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Master seed; drawn from the clock and printed when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Gap threshold; defaults to the family's lower-bound gap (0.1 for
    /// uniform-deviation and sgd-contrast).
    #[arg(long)]
    pub gap: Option<f64>,
    #[arg(long, default_value = "erm-gap")]
    pub mode: Mode,
    /// Worker threads for trial-level parallelism.
    #[arg(long, default_value_t = 0)]
    pub parallel: usize,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV path, one row per trial.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cases per battery.
    #[arg(long, default_value_t = 2000)]
    pub cases: usize,
    /// JSON path for the battery results.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CodesArgs {
    #[arg(long, default_value = "127-64")]
    pub code: CodePreset,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
