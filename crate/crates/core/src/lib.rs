//! Monte Carlo simulator of a self-governing prediction competition.
//!
//! A group of experts forecasts binary questions. The group itself resolves
//! each outcome by vote, and rewards are the product of a surprisal-based
//! accuracy term, the spread of surprisals on the question, and the level of
//! consensus on the result. Experts hold an integer degree of belief in a
//! theory that is objectively true; belief governs forecast quality, and
//! beliefs drift by random mutation and by chasing the best-rewarded expert.
//!
//! Modules, bottom-up:
//!
//! - [`scoring`]: the per-question reward rule.
//! - [`agents`]: forecast sampling, belief updates and biased resolution.
//! - [`rng`]: the seeded uniform stream and child-seed derivation.
//! - [`engine`]: one full simulation with exit criterion and snapshots.
//! - [`sweep`]: parallel phase-diagram sweeps over affinity and bias, plus
//!   calibration of the reward thresholds.
//! - [`io`]: trajectory and phase-dataset file formats.

pub mod agents;
pub mod engine;
mod error;
pub mod io;
pub mod rng;
pub mod scoring;
pub mod sweep;

#[cfg(test)]
mod run_properties;

pub use agents::{
    BeliefLevel, BiasPolicy, ForecastProfile, LargeRewardWeights, ProbabilityClamp, UpdatePolicy,
};
pub use engine::{
    freeze_beliefs_run, run, ExpertState, MeanBelief, QuestionRecord, SimulationParams,
    Simulation, Trajectory,
};
pub use error::{Error, Result};
pub use rng::{child_seed, SimRng, UniformSource, GENERATOR_ID};
pub use scoring::{
    consensus_summary, score_question, surprisal, surprisal_stats, ConsensusSummary, Outcome,
    QuestionScore, Resolution, RewardVector, SurprisalStats,
};
pub use sweep::{
    builtin_scenarios, calibrate, run_sweep, Calibration, Classification, PhasePoint, Sampling,
    Scenario, SweepSpec,
};
