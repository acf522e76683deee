//! Reward learning from demonstrations against estimated choice sets.
//!
//! A learner observes demonstrations `D` from a Boltzmann-rational teacher
//! and infers linear reward weights `θ` by comparing each demonstration to
//! a choice set of alternatives. The crate provides:
//!
//! * [`inference`]: Boltzmann likelihood, discrete posteriors, entropy,
//!   Metropolis–Hastings on the unit sphere, evaluation metrics;
//! * [`counterfactual`]: noisy, sparse-input and consistent-input
//!   counterfactuals and choice-set assembly;
//! * [`environments`]: Lavaworld and CoffeeWorld;
//! * [`simhuman`]: limitation-constrained simulated teachers;
//! * [`experiments`]: baseline choice sets, sweeps and property suites.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counterfactual;
pub mod environments;
pub mod error;
pub mod experiments;
pub mod format;
pub mod inference;
pub mod seed;
pub mod simhuman;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    canonical_round, reward, ChoiceSet, DemonstrationSet, FeatureMap, FeatureVector, InputSequence,
    Provenance, RewardHypothesis, Trajectory, DEDUP_DECIMALS,
};
pub use inference::{Belief, MhConfig, Rationality};
pub use environments::{Dynamics, Env, EnvSpec};
pub use experiments::{ExperimentConfig, ExperimentRecord, MethodId};
pub use simhuman::{Limitation, TeacherSpec};
