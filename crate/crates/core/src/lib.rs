//! Adversarial stochastic convex optimization laboratory.
//!
//! The crate builds distributions over convex functions on which a valid
//! empirical risk minimizer generalizes badly, evaluates their population
//! objectives exactly, and runs seeded Monte Carlo experiments comparing the
//! observed failure frequency against closed-form coverage probabilities.
//!
//! Module map:
//! - [`packing`]: sign-vector packings and evenly spaced circle sets.
//! - [`codes`]: binary BCH codes and fast evaluation of the code-based functions.
//! - [`instances`]: the seven function families and their exact population objectives.
//! - [`erm`]: empirical objectives, closed-form bad ERM selectors, projected subgradient baseline.
//! - [`experiments`]: trial runner, reports, coverage and deviation predictions.
//! - [`checks`]: invariant batteries (convexity, Lipschitz, smoothness, codec).

pub mod checks;
pub mod codes;
pub mod erm;
mod error;
pub mod experiments;
pub mod instances;
pub mod linalg;
pub mod mask;
pub mod packing;
pub mod sampling;
pub mod seed;

pub use codes::{BchCode, CodePreset};
pub use erm::{ErmOutcome, SampleSet};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, ExperimentReport, Mode, TrialRecord};
pub use instances::{Distribution, DistributionSpec, FamilyKind, FunctionSample, NormIndex};
pub use mask::Mask;
pub use packing::{CircleSet, PackedSet, SignVector};
