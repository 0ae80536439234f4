//! Phase-diagram sweeps over the (affinity, bias) plane.
//!
//! Every sample gets its own child seed derived from the master seed and the
//! sample index, so output is identical for any worker count.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{BeliefLevel, LargeRewardWeights};
use crate::engine::{freeze_beliefs_run, run_with, MeanBelief, SimulationParams, Trajectory};
use crate::error::{Error, Result};
use crate::rng::{child_seed, domain_seed, SimRng, UniformSource};

/// Domain tag for the parameter-sampling stream ("PAIRSMPL").
const SAMPLING_DOMAIN: u64 = 0x5041_4952_534D_504C;

/// A named initial-belief layout. Experts are laid out in the listed order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub layout: Vec<(usize, BeliefLevel)>,
}

impl Scenario {
    pub fn new(name: impl Into<String>, layout: Vec<(usize, BeliefLevel)>) -> Self {
        Scenario {
            name: name.into(),
            layout,
        }
    }

    pub fn n_experts(&self) -> usize {
        self.layout.iter().map(|(count, _)| count).sum()
    }

    pub fn beliefs(&self) -> Vec<BeliefLevel> {
        self.layout
            .iter()
            .flat_map(|&(count, d)| std::iter::repeat_n(d, count))
            .collect()
    }

    /// True when every expert starts at the same belief.
    pub fn is_unanimous(&self) -> bool {
        let beliefs = self.beliefs();
        beliefs.windows(2).all(|w| w[0] == w[1])
    }

    /// Look up a builtin layout, or the all-believers layout used for calibration.
    pub fn named(name: &str) -> Option<Scenario> {
        builtin_scenarios()
            .into_iter()
            .chain(std::iter::once(unanimous_positive()))
            .find(|s| s.name == name)
    }

    pub fn apply(&self, params: SimulationParams) -> SimulationParams {
        params.with_beliefs(self.beliefs())
    }
}

/// The five layouts studied in the phase diagrams, all with 20 experts.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let (neg, pos) = (BeliefLevel::MIN, BeliefLevel::MAX);
    vec![
        Scenario::new("split-10-10", vec![(10, neg), (10, pos)]),
        Scenario::new("contrarian-1", vec![(19, neg), (1, pos)]),
        Scenario::new("unanimous-neg", vec![(20, neg)]),
        Scenario::new("seed-2", vec![(18, neg), (2, pos)]),
        Scenario::new("seed-3", vec![(17, neg), (3, pos)]),
    ]
}

/// Twenty experts, all at the strongest belief.
pub fn unanimous_positive() -> Scenario {
    Scenario::new("unanimous-pos", vec![(20, BeliefLevel::MAX)])
}

/// How (a₀, b) pairs are chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sampling {
    /// Independent uniform pairs over the two ranges.
    Random {
        count: usize,
        a0_range: [f64; 2],
        b_range: [f64; 2],
    },
    /// Every combination of the listed values, `replicates` runs each.
    /// Order: a₀ outermost, then b, then replicate.
    Grid {
        a0_values: Vec<f64>,
        b_values: Vec<f64>,
        replicates: usize,
    },
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::Random {
            count: 3000,
            a0_range: [0.0, 0.3],
            b_range: [0.0, 1.2],
        }
    }
}

fn check_range(field: &str, r: [f64; 2]) -> Result<()> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
        return Err(Error::param(field, format!("empty or non-finite range [{}, {}]", r[0], r[1])));
    }
    Ok(())
}

fn check_values(field: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::param(field, "no values"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::param(field, "non-finite value"));
    }
    Ok(())
}

impl Sampling {
    pub fn validate(&self) -> Result<()> {
        match self {
            Sampling::Random {
                count,
                a0_range,
                b_range,
            } => {
                if *count == 0 {
                    return Err(Error::param("sampling.count", "must be at least 1"));
                }
                check_range("sampling.a0_range", *a0_range)?;
                check_range("sampling.b_range", *b_range)?;
                if a0_range[0] < 0.0 || b_range[0] < 0.0 {
                    return Err(Error::param("sampling", "a0 and b must be nonnegative"));
                }
            }
            Sampling::Grid {
                a0_values,
                b_values,
                replicates,
            } => {
                check_values("sampling.a0_values", a0_values)?;
                check_values("sampling.b_values", b_values)?;
                if a0_values.iter().chain(b_values).any(|&v| v < 0.0) {
                    return Err(Error::param("sampling", "a0 and b must be nonnegative"));
                }
                if *replicates == 0 {
                    return Err(Error::param("sampling.replicates", "must be at least 1"));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match self {
            Sampling::Random { count, .. } => *count,
            Sampling::Grid {
                a0_values,
                b_values,
                replicates,
            } => a0_values.len() * b_values.len() * replicates,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The (a₀, b) pair of every sample, in sample-index order.
    pub fn pairs(&self, master_seed: u64) -> Vec<(f64, f64)> {
        match self {
            Sampling::Random {
                count,
                a0_range,
                b_range,
            } => {
                let mut rng = SimRng::seed_from_u64(domain_seed(master_seed, SAMPLING_DOMAIN));
                (0..*count)
                    .map(|_| {
                        let a0 = a0_range[0] + (a0_range[1] - a0_range[0]) * rng.next_open01();
                        let b = b_range[0] + (b_range[1] - b_range[0]) * rng.next_open01();
                        (a0, b)
                    })
                    .collect()
            }
            Sampling::Grid {
                a0_values,
                b_values,
                replicates,
            } => a0_values
                .iter()
                .flat_map(|&a0| {
                    b_values
                        .iter()
                        .flat_map(move |&b| std::iter::repeat_n((a0, b), *replicates))
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Everything except a₀, b, seed, initial beliefs and checkpoints.
    pub base_params: SimulationParams,
    pub sampling: Sampling,
    pub checkpoints: Vec<usize>,
    pub master_seed: u64,
    pub scenario: Scenario,
}

impl SweepSpec {
    pub fn new(base_params: SimulationParams, scenario: Scenario, sampling: Sampling) -> Self {
        SweepSpec {
            checkpoints: base_params.checkpoints.clone(),
            base_params,
            sampling,
            master_seed: 0,
            scenario,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sampling.validate()?;
        if self.scenario.n_experts() == 0 {
            return Err(Error::param("scenario", "has no experts"));
        }
        self.params_for(0.0, 0.0, 0).validate()
    }

    /// Engine parameters for one sample.
    pub fn params_for(&self, a0: f64, b: f64, seed: u64) -> SimulationParams {
        let mut p = self.scenario.apply(self.base_params.clone());
        p.update_policy.base_affinity = a0;
        p.bias_policy.bias = b;
        p.seed = seed;
        p.checkpoints = self.checkpoints.clone();
        p
    }

    /// Seed and parameters of sample `index`, as run by the sweep.
    pub fn sample(&self, index: usize) -> Option<SimulationParams> {
        let &(a0, b) = self.sampling.pairs(self.master_seed).get(index)?;
        Some(self.params_for(a0, b, child_seed(self.master_seed, index as u64)))
    }
}

/// Sign class of a mean belief.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Belief,
    Disbelief,
    Undecided,
}

impl Classification {
    pub fn of(mean: MeanBelief) -> Self {
        match mean.sign() {
            1 => Classification::Belief,
            -1 => Classification::Disbelief,
            _ => Classification::Undecided,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Belief => "belief",
            Classification::Disbelief => "disbelief",
            Classification::Undecided => "undecided",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one sweep sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub sample_index: usize,
    pub a0: f64,
    pub b: f64,
    pub seed: u64,
    /// Mean belief as of each checkpoint, in checkpoint order.
    pub checkpoint_means: Vec<(usize, MeanBelief)>,
    pub final_mean: MeanBelief,
    pub halted_by_stability: bool,
    pub halt_step: usize,
    pub classification: Classification,
    pub magnitude: f64,
}

impl PhasePoint {
    pub fn from_trajectory(sample_index: usize, checkpoints: &[usize], t: &Trajectory) -> Self {
        let final_mean = t.final_mean_belief();
        PhasePoint {
            sample_index,
            a0: t.params.update_policy.base_affinity,
            b: t.params.bias_policy.bias,
            seed: t.params.seed,
            checkpoint_means: checkpoints
                .iter()
                .map(|&c| (c, t.mean_belief_at(c).unwrap_or(final_mean)))
                .collect(),
            final_mean,
            halted_by_stability: t.halted_by_stability,
            halt_step: t.halt_step,
            classification: Classification::of(final_mean),
            magnitude: final_mean.value().abs(),
        }
    }

    pub fn mean_at(&self, checkpoint: usize) -> Option<MeanBelief> {
        self.checkpoint_means
            .iter()
            .find(|(c, _)| *c == checkpoint)
            .map(|&(_, m)| m)
    }

    pub fn classification_at(&self, checkpoint: usize) -> Option<Classification> {
        self.mean_at(checkpoint).map(Classification::of)
    }
}

/// Run one sample exactly as the sweep does.
pub fn run_sample(spec: &SweepSpec, index: usize, a0: f64, b: f64) -> Result<PhasePoint> {
    let params = spec.params_for(a0, b, child_seed(spec.master_seed, index as u64));
    let t = run_with(&params, SimRng::seed_from_u64(params.seed), false)?;
    Ok(PhasePoint::from_trajectory(index, &spec.checkpoints, &t))
}

/// Run every sample of the sweep on `workers` threads. Output is in sample order.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<Vec<PhasePoint>> {
    spec.validate()?;
    if workers == 0 {
        return Err(Error::param("workers", "must be at least 1"));
    }
    let pairs = spec.sampling.pairs(spec.master_seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?;
    pool.install(|| {
        pairs
            .par_iter()
            .enumerate()
            .map(|(i, &(a0, b))| run_sample(spec, i, a0, b))
            .collect()
    })
}

/// Threshold estimates from frozen-belief runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Mean total reward with the group evenly split between the extremes.
    pub split_mean_total: f64,
    /// Mean total reward with every expert at the strongest belief.
    pub unanimous_mean_total: f64,
    /// Half the split mean.
    pub affinity_threshold_reward: f64,
    /// Twice the unanimous mean.
    pub reward_threshold: f64,
    pub n_questions: usize,
}

pub fn affinity_threshold_from(mean_total: f64) -> f64 {
    mean_total / 2.0
}

pub fn reward_threshold_from(mean_total: f64) -> f64 {
    2.0 * mean_total
}

/// Estimate the affinity threshold reward r₀ and the exit threshold from
/// frozen-belief runs of `n_questions` each.
pub fn calibrate(base_params: &SimulationParams, n_questions: usize) -> Result<Calibration> {
    let split = builtin_scenarios()
        .into_iter()
        .find(|s| s.name == "split-10-10")
        .expect("builtin split scenario");
    let split_mean_total = freeze_beliefs_run(&split.apply(base_params.clone()), n_questions)?;
    let unanimous_mean_total =
        freeze_beliefs_run(&unanimous_positive().apply(base_params.clone()), n_questions)?;
    Ok(Calibration {
        split_mean_total,
        unanimous_mean_total,
        affinity_threshold_reward: affinity_threshold_from(split_mean_total),
        reward_threshold: reward_threshold_from(unanimous_mean_total),
        n_questions,
    })
}

/// A named parameter variation for robustness studies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessPreset {
    pub name: String,
    pub mutation_rate: Option<f64>,
    pub threshold_bias: Option<f64>,
    pub large_reward_weights: Option<[f64; 2]>,
}

impl RobustnessPreset {
    pub fn apply(&self, mut params: SimulationParams) -> Result<SimulationParams> {
        if let Some(mu) = self.mutation_rate {
            params.update_policy.mutation_rate = mu;
        }
        if let Some(b0) = self.threshold_bias {
            params.bias_policy.threshold_bias = b0;
        }
        if let Some([x, y]) = self.large_reward_weights {
            params.update_policy.large_reward_weights = LargeRewardWeights::new(x, y)?;
        }
        Ok(params)
    }
}

pub fn robustness_presets() -> Vec<RobustnessPreset> {
    let preset = |name: &str, mu, b0, w| RobustnessPreset {
        name: name.to_string(),
        mutation_rate: mu,
        threshold_bias: b0,
        large_reward_weights: w,
    };
    vec![
        preset("baseline", Some(0.01), Some(0.7), Some([0.5, 0.5])),
        preset("no-mutation", Some(0.0), None, None),
        preset("b0-1.4", None, Some(1.4), None),
        preset("b0-2.3", None, Some(2.3), None),
        preset("xy-mean-heavy", None, None, Some([0.75, 0.25])),
        preset("xy-max-heavy", None, None, Some([0.25, 0.75])),
    ]
}
