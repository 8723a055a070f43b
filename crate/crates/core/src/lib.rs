//! Interference-constrained beamforming for a multi-antenna satellite that
//! shares spectrum with a terrestrial network.
//!
//! The transmitter sees only large-scale channel state and drives Saleh-model
//! power amplifiers. [`beamformer::solve`] returns a provably optimal
//! amplitude/phase design; [`baselines`] holds the comparison schemes and
//! [`sim`] the Monte Carlo sweep engine.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod beamformer;
pub mod channel;
pub mod error;
pub mod pa;
pub mod rate;
pub mod sim;
pub mod units;

pub use baselines::BaselineKind;
pub use beamformer::{
    solve, solve_substituted, BeamWeights, ProblemSpec, SolveReport, SolveStatus, SubstitutedPoint,
};
pub use channel::{ChannelConfig, ChannelScenario, LargeScaleChannel, SmallScalePhase};
pub use error::{Error, Result};
pub use pa::{PaBank, SalehParams};
pub use sim::{ExperimentConfig, SalehDistribution, Scheme, SweepResult, SweepRow, SweepVariable};
