//! One full simulated competition.
//!
//! Each question runs in a fixed order and consumes exactly `1 + 5N` uniform
//! draws:
//!
//! 1. one draw for the true outcome;
//! 2. one forecast draw per expert, in index order;
//! 3. one resolution draw per expert, after objective surprisals are known;
//! 4. scoring against the group's effective outcome, and reward bookkeeping;
//! 5. per expert: two mutation draws and one update draw.
//!
//! The benchmark ("large") reward uses cumulative totals that already include
//! the current question. The leader is the expert with the highest cumulative
//! reward, lowest index on ties, and its belief is read before anyone updates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agents::{
    effective_affinity, large_reward, mutate_belief, resolve_outcome, reward_motivated_update,
    sample_forecast, BeliefLevel, BiasPolicy, ForecastProfile, ProbabilityClamp, UpdatePolicy,
};
use crate::error::{Error, Result};
use crate::rng::{SimRng, UniformSource, GENERATOR_ID};
use crate::scoring::{
    closed_form_total, score_question, surprisal, ConsensusSummary, Outcome, Resolution,
    RewardVector, SurprisalStats,
};

pub const DEFAULT_CHECKPOINTS: [usize; 5] = [1, 10, 50, 100, 1000];

/// Number of uniform draws consumed by one question with `n_experts` experts.
pub fn draws_per_question(n_experts: usize) -> u64 {
    1 + 5 * n_experts as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationParams {
    pub n_experts: usize,
    pub initial_beliefs: Vec<BeliefLevel>,
    pub update_policy: UpdatePolicy,
    pub bias_policy: BiasPolicy,
    pub breadth_constant: f64,
    pub clamp: ProbabilityClamp,
    pub forecast_profile: ForecastProfile,
    pub reward_threshold: f64,
    pub n_stable: usize,
    pub n_max: usize,
    pub outcome_yes_probability: f64,
    pub seed: u64,
    pub checkpoints: Vec<usize>,
}

impl Default for SimulationParams {
    fn default() -> Self {
        let mut initial_beliefs = vec![BeliefLevel::MIN; 10];
        initial_beliefs.extend([BeliefLevel::MAX; 10]);
        SimulationParams {
            n_experts: 20,
            initial_beliefs,
            update_policy: UpdatePolicy::default(),
            bias_policy: BiasPolicy::default(),
            breadth_constant: 1.0,
            clamp: ProbabilityClamp::default(),
            forecast_profile: ForecastProfile::default(),
            reward_threshold: 4.04,
            n_stable: 4,
            n_max: 1000,
            outcome_yes_probability: 0.5,
            seed: 0,
            checkpoints: DEFAULT_CHECKPOINTS.to_vec(),
        }
    }
}

impl SimulationParams {
    /// Replace the initial beliefs (and the expert count to match).
    pub fn with_beliefs(mut self, beliefs: Vec<BeliefLevel>) -> Self {
        self.n_experts = beliefs.len();
        self.initial_beliefs = beliefs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_experts == 0 {
            return Err(Error::param("n_experts", "must be at least 1"));
        }
        if self.initial_beliefs.len() != self.n_experts {
            return Err(Error::param(
                "initial_beliefs",
                format!(
                    "has {} entries but n_experts is {}",
                    self.initial_beliefs.len(),
                    self.n_experts
                ),
            ));
        }
        self.update_policy.validate()?;
        self.bias_policy.validate()?;
        if !self.breadth_constant.is_finite() {
            return Err(Error::param("breadth_constant", "must be finite"));
        }
        if !self.reward_threshold.is_finite() {
            return Err(Error::param("reward_threshold", "must be finite"));
        }
        if self.n_stable == 0 {
            return Err(Error::param("n_stable", "must be at least 1"));
        }
        if self.n_max == 0 {
            return Err(Error::param("n_max", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.outcome_yes_probability) {
            return Err(Error::param("outcome_yes_probability", "must lie in [0, 1]"));
        }
        if self.checkpoints.contains(&0) {
            return Err(Error::param("checkpoints", "question indices start at 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpertState {
    pub belief: BeliefLevel,
    pub cumulative_reward: f64,
}

/// Mean degree of belief, kept as an exact integer sum over a count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeanBelief {
    pub sum: i64,
    pub count: usize,
}

impl MeanBelief {
    pub fn of(beliefs: impl IntoIterator<Item = BeliefLevel>) -> Self {
        let (sum, count) = beliefs
            .into_iter()
            .fold((0i64, 0usize), |(s, c), d| (s + i64::from(d.value()), c + 1));
        MeanBelief { sum, count }
    }

    pub fn value(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }

    pub fn sign(&self) -> i8 {
        self.sum.signum() as i8
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    /// 1-based question index.
    pub index: usize,
    pub objective_outcome: Outcome,
    pub forecasts: Vec<f64>,
    pub objective_surprisals: Vec<f64>,
    pub resolutions: Vec<Resolution>,
    pub consensus: ConsensusSummary,
    /// Surprisals against the effective outcome; absent for a split vote.
    pub consensus_surprisals: Option<Vec<f64>>,
    pub stats: Option<SurprisalStats>,
    pub rewards: RewardVector,
    pub beliefs_after: Vec<BeliefLevel>,
    pub total_reward: f64,
}

impl QuestionRecord {
    pub fn mean_belief_after(&self) -> MeanBelief {
        MeanBelief::of(self.beliefs_after.iter().copied())
    }
}

/// A stepping simulation over any uniform source.
#[derive(Clone, Debug)]
pub struct Simulation<R> {
    params: SimulationParams,
    experts: Vec<ExpertState>,
    rng: R,
    questions: usize,
    update_beliefs: bool,
}

impl<R: UniformSource> Simulation<R> {
    pub fn new(params: SimulationParams, rng: R) -> Result<Self> {
        params.validate()?;
        let experts = params
            .initial_beliefs
            .iter()
            .map(|&belief| ExpertState {
                belief,
                cumulative_reward: 0.0,
            })
            .collect();
        Ok(Simulation {
            params,
            experts,
            rng,
            questions: 0,
            update_beliefs: true,
        })
    }

    /// Hold beliefs fixed. Draws are still consumed at the usual rate.
    pub fn freeze_beliefs(mut self) -> Self {
        self.update_beliefs = false;
        self
    }

    pub fn params(&self) -> &SimulationParams {
        &self.params
    }

    pub fn experts(&self) -> &[ExpertState] {
        &self.experts
    }

    pub fn questions_asked(&self) -> usize {
        self.questions
    }

    pub fn mean_belief(&self) -> MeanBelief {
        MeanBelief::of(self.experts.iter().map(|e| e.belief))
    }

    pub fn rng(&self) -> &R {
        &self.rng
    }

    /// Run one question cycle.
    pub fn step(&mut self) -> Result<QuestionRecord> {
        let p = &self.params;
        let rng = &mut self.rng;
        let n = self.experts.len();

        let outcome = if rng.next_open01() < p.outcome_yes_probability {
            Outcome::Yes
        } else {
            Outcome::No
        };

        let mut forecasts = Vec::with_capacity(n);
        for e in &self.experts {
            let nu = rng.next_open01();
            forecasts.push(sample_forecast(&p.forecast_profile, e.belief, outcome, nu, &p.clamp)?);
        }

        let objective_surprisals = forecasts
            .iter()
            .map(|&f| surprisal(f, outcome))
            .collect::<Result<Vec<_>>>()?;
        let mean_objective = objective_surprisals.iter().sum::<f64>() / n as f64;

        let resolutions: Vec<Resolution> = objective_surprisals
            .iter()
            .map(|&s| resolve_outcome(s, mean_objective, outcome, &p.bias_policy, rng.next_open01()))
            .collect();

        let score = score_question(&forecasts, &resolutions, p.breadth_constant)?;
        for (e, r) in self.experts.iter_mut().zip(&score.rewards.per_expert) {
            e.cumulative_reward += r;
        }

        let mut leader = 0;
        for (i, e) in self.experts.iter().enumerate() {
            if e.cumulative_reward > self.experts[leader].cumulative_reward {
                leader = i;
            }
        }
        let leader_belief = self.experts[leader].belief;
        let max_cumulative = self.experts[leader].cumulative_reward;
        let mean_cumulative = self.experts.iter().map(|e| e.cumulative_reward).sum::<f64>() / n as f64;
        let policy = &p.update_policy;
        let large = large_reward(mean_cumulative, max_cumulative, policy.large_reward_weights);
        let affinity = effective_affinity(
            policy.base_affinity,
            score.rewards.total,
            policy.affinity_threshold_reward,
        );

        for e in self.experts.iter_mut() {
            let nu_up = rng.next_open01();
            let nu_down = rng.next_open01();
            let nu_update = rng.next_open01();
            if self.update_beliefs {
                let d = mutate_belief(e.belief, policy.mutation_rate, nu_up, nu_down);
                e.belief = reward_motivated_update(
                    d,
                    leader_belief,
                    e.cumulative_reward,
                    large,
                    affinity,
                    nu_update,
                );
            }
        }

        self.questions += 1;
        let total_reward = score.rewards.total;
        Ok(QuestionRecord {
            index: self.questions,
            objective_outcome: outcome,
            forecasts,
            objective_surprisals,
            resolutions,
            consensus: score.consensus,
            consensus_surprisals: score.surprisals,
            stats: score.stats,
            rewards: score.rewards,
            beliefs_after: self.experts.iter().map(|e| e.belief).collect(),
            total_reward,
        })
    }
}

/// Result of one simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: SimulationParams,
    pub generator: String,
    /// Per-question records; empty for summary runs.
    pub records: Vec<QuestionRecord>,
    /// Total reward of every question asked, kept even for summary runs.
    pub totals: Vec<f64>,
    pub halted_by_stability: bool,
    pub halt_step: usize,
    /// Mean belief after each checkpoint question reached, and after the halt step.
    pub snapshots: BTreeMap<usize, MeanBelief>,
    pub final_experts: Vec<ExpertState>,
}

impl Trajectory {
    pub fn final_mean_belief(&self) -> MeanBelief {
        MeanBelief::of(self.final_experts.iter().map(|e| e.belief))
    }

    /// Mean belief as of question `j`. Questions stop at the halt step, so
    /// any later checkpoint reports the final state.
    pub fn mean_belief_at(&self, j: usize) -> Option<MeanBelief> {
        self.snapshots.get(&j.min(self.halt_step)).copied()
    }

    /// Re-derive every bookkeeping invariant from the stored data.
    pub fn check_invariants(&self) -> Result<()> {
        let p = &self.params;
        let fail = |msg: String| Err(Error::Invariant(msg));
        if self.halt_step == 0 || self.halt_step > p.n_max {
            return fail(format!("halt step {} outside [1, {}]", self.halt_step, p.n_max));
        }
        if self.totals.len() != self.halt_step {
            return fail(format!("{} totals for {} questions", self.totals.len(), self.halt_step));
        }

        let below: Vec<bool> = self.totals.iter().map(|&t| t < p.reward_threshold).collect();
        let first_window = below
            .windows(p.n_stable)
            .position(|w| w.iter().all(|&b| b))
            .map(|start| start + p.n_stable);
        match (self.halted_by_stability, first_window) {
            (true, Some(end)) if end == self.halt_step => {}
            (false, None) if self.halt_step == p.n_max => {}
            _ => {
                return fail(format!(
                    "halt flag {} at step {} disagrees with first stable window {:?}",
                    self.halted_by_stability, self.halt_step, first_window
                ))
            }
        }

        if self.records.is_empty() {
            return Ok(());
        }
        if self.records.len() != self.halt_step {
            return fail(format!("{} records for {} questions", self.records.len(), self.halt_step));
        }
        let n = p.n_experts;
        let mut cumulative = vec![0.0; n];
        for (k, rec) in self.records.iter().enumerate() {
            if rec.index != k + 1 {
                return fail(format!("record {} carries index {}", k + 1, rec.index));
            }
            let lens = [
                rec.forecasts.len(),
                rec.objective_surprisals.len(),
                rec.resolutions.len(),
                rec.rewards.per_expert.len(),
                rec.beliefs_after.len(),
            ];
            if lens.iter().any(|&l| l != n) {
                return fail(format!("question {}: list lengths {:?} != {}", rec.index, lens, n));
            }
            if rec.total_reward.to_bits() != self.totals[k].to_bits() {
                return fail(format!("question {}: total mismatch", rec.index));
            }
            let sum: f64 = rec.rewards.per_expert.iter().sum();
            if (sum - rec.total_reward).abs() > 1e-9 {
                return fail(format!("question {}: rewards sum {} != total {}", rec.index, sum, rec.total_reward));
            }
            match (&rec.stats, rec.consensus.effective_outcome) {
                (Some(st), Some(_)) => {
                    let closed = closed_form_total(st, &rec.consensus);
                    if (closed - rec.total_reward).abs() > 1e-9 {
                        return fail(format!(
                            "question {}: total {} != c N Δs² |V| = {}",
                            rec.index, rec.total_reward, closed
                        ));
                    }
                }
                (None, None) => {
                    if rec.rewards.per_expert.iter().any(|&r| r != 0.0) {
                        return fail(format!("question {}: split vote paid out", rec.index));
                    }
                }
                _ => return fail(format!("question {}: stats/consensus mismatch", rec.index)),
            }
            for (c, r) in cumulative.iter_mut().zip(&rec.rewards.per_expert) {
                *c += r;
            }
        }
        for (i, (c, e)) in cumulative.iter().zip(&self.final_experts).enumerate() {
            if (c - e.cumulative_reward).abs() > 1e-9 {
                return fail(format!("expert {i}: cumulative {} != sum of rewards {}", e.cumulative_reward, c));
            }
        }
        let last = &self.records[self.records.len() - 1];
        let final_beliefs: Vec<BeliefLevel> = self.final_experts.iter().map(|e| e.belief).collect();
        if last.beliefs_after != final_beliefs {
            return fail("final beliefs differ from last record".into());
        }
        Ok(())
    }
}

fn drive<R: UniformSource>(mut sim: Simulation<R>, keep_records: bool) -> Result<Trajectory> {
    let params = sim.params().clone();
    let mut records = Vec::new();
    let mut totals = Vec::with_capacity(params.n_max.min(1 << 16));
    let mut snapshots = BTreeMap::new();
    let mut streak = 0;
    let mut halted = false;

    while sim.questions_asked() < params.n_max {
        let rec = sim.step()?;
        let j = rec.index;
        totals.push(rec.total_reward);
        if rec.total_reward < params.reward_threshold {
            streak += 1;
        } else {
            streak = 0;
        }
        if params.checkpoints.contains(&j) {
            snapshots.insert(j, rec.mean_belief_after());
        }
        if keep_records {
            records.push(rec);
        }
        if streak >= params.n_stable {
            halted = true;
            break;
        }
    }

    let halt_step = sim.questions_asked();
    snapshots.insert(halt_step, sim.mean_belief());
    Ok(Trajectory {
        params,
        generator: GENERATOR_ID.to_string(),
        records,
        totals,
        halted_by_stability: halted,
        halt_step,
        snapshots,
        final_experts: sim.experts().to_vec(),
    })
}

/// Run a full simulation seeded from `params.seed`, keeping every record.
pub fn run(params: &SimulationParams) -> Result<Trajectory> {
    run_with(params, SimRng::seed_from_u64(params.seed), true)
}

/// Run a simulation over an explicit uniform source.
pub fn run_with<R: UniformSource>(
    params: &SimulationParams,
    rng: R,
    keep_records: bool,
) -> Result<Trajectory> {
    drive(Simulation::new(params.clone(), rng)?, keep_records)
}

/// Run `n_questions` with beliefs frozen and no exit criterion; returns the
/// mean total reward per question.
pub fn freeze_beliefs_run(params: &SimulationParams, n_questions: usize) -> Result<f64> {
    if n_questions == 0 {
        return Err(Error::InvalidInput("n_questions must be at least 1".into()));
    }
    let mut sim = Simulation::new(params.clone(), SimRng::seed_from_u64(params.seed))?.freeze_beliefs();
    let mut sum = 0.0;
    for _ in 0..n_questions {
        sum += sim.step()?.total_reward;
    }
    Ok(sum / n_questions as f64)
}
