//! Behavioral model of a single expert.
//!
//! All randomness enters through uniform draws passed in by the caller, so
//! every function here is deterministic and thread-safe.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{Outcome, Resolution};

/// Integer degree of belief in the theory, from -4 (strongest disbelief) to +4.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub struct BeliefLevel(i8);

impl BeliefLevel {
    pub const MIN: BeliefLevel = BeliefLevel(-4);
    pub const MAX: BeliefLevel = BeliefLevel(4);
    pub const UNDECIDED: BeliefLevel = BeliefLevel(0);

    pub fn new(d: i8) -> Result<Self> {
        if (Self::MIN.0..=Self::MAX.0).contains(&d) {
            Ok(BeliefLevel(d))
        } else {
            Err(Error::InvalidInput(format!("belief level {d} outside [-4, 4]")))
        }
    }

    pub fn value(self) -> i8 {
        self.0
    }

    /// Magnitude `|d|`, used to index the forecast profile.
    pub fn strength(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn increment(self) -> Self {
        BeliefLevel((self.0 + 1).min(Self::MAX.0))
    }

    pub fn decrement(self) -> Self {
        BeliefLevel((self.0 - 1).max(Self::MIN.0))
    }

    /// One step toward `target`; no change if already there.
    pub fn step_toward(self, target: BeliefLevel) -> Self {
        BeliefLevel(self.0 + (target.0 - self.0).signum())
    }
}

impl std::ops::Neg for BeliefLevel {
    type Output = BeliefLevel;

    fn neg(self) -> BeliefLevel {
        BeliefLevel(-self.0)
    }
}

impl TryFrom<i8> for BeliefLevel {
    type Error = Error;

    fn try_from(d: i8) -> Result<Self> {
        BeliefLevel::new(d)
    }
}

impl From<BeliefLevel> for i8 {
    fn from(d: BeliefLevel) -> i8 {
        d.0
    }
}

impl fmt::Display for BeliefLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.0)
    }
}

/// Power-law exponents for forecast sampling, indexed by `|d|`.
///
/// A believer (`d > 0`) forecasts `1 - ν^k`, a disbeliever `ν^k`, and the
/// undecided `1 - ν`. The mean of `1 - ν^k` over uniform `ν` is `k / (k + 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 5]", into = "[f64; 5]")]
pub struct ForecastProfile {
    exponents: [f64; 5],
}

impl ForecastProfile {
    pub const DEFAULT_EXPONENTS: [f64; 5] = [1.0, 1.6, 2.7, 5.3, 21.0];

    pub fn new(exponents: [f64; 5]) -> Result<Self> {
        if exponents.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(Error::param("forecast_profile", "exponents must be positive and finite"));
        }
        if exponents.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param(
                "forecast_profile",
                "exponents must strictly increase with |d|",
            ));
        }
        Ok(ForecastProfile { exponents })
    }

    pub fn exponents(&self) -> [f64; 5] {
        self.exponents
    }

    pub fn exponent(&self, d: BeliefLevel) -> f64 {
        self.exponents[d.strength()]
    }

    /// Unclamped forecast `p(ν, d)` for a question whose true answer is yes.
    pub fn raw(&self, d: BeliefLevel, nu: f64) -> f64 {
        let k = self.exponent(d);
        match d.value().signum() {
            1 => 1.0 - nu.powf(k),
            -1 => nu.powf(k),
            _ => 1.0 - nu,
        }
    }

    /// Mean of the unclamped forecast over uniform `ν`, for a true answer of yes.
    pub fn expected(&self, d: BeliefLevel) -> f64 {
        let k = self.exponent(d);
        let believer = k / (k + 1.0);
        if d.value() < 0 {
            1.0 - believer
        } else {
            believer
        }
    }
}

impl Default for ForecastProfile {
    fn default() -> Self {
        ForecastProfile {
            exponents: Self::DEFAULT_EXPONENTS,
        }
    }
}

impl TryFrom<[f64; 5]> for ForecastProfile {
    type Error = Error;

    fn try_from(exponents: [f64; 5]) -> Result<Self> {
        ForecastProfile::new(exponents)
    }
}

impl From<ForecastProfile> for [f64; 5] {
    fn from(p: ForecastProfile) -> Self {
        p.exponents
    }
}

/// Allowed forecast range `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct ProbabilityClamp {
    min: f64,
    max: f64,
}

impl ProbabilityClamp {
    /// No clamping at all.
    pub const UNIT: ProbabilityClamp = ProbabilityClamp { min: 0.0, max: 1.0 };

    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(0.0 <= min && min < max && max <= 1.0) {
            return Err(Error::param(
                "clamp",
                format!("need 0 <= min < max <= 1, got [{min}, {max}]"),
            ));
        }
        Ok(ProbabilityClamp { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn apply(&self, p: f64) -> f64 {
        p.clamp(self.min, self.max)
    }
}

impl Default for ProbabilityClamp {
    fn default() -> Self {
        ProbabilityClamp { min: 0.01, max: 0.99 }
    }
}

impl TryFrom<[f64; 2]> for ProbabilityClamp {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        ProbabilityClamp::new(v[0], v[1])
    }
}

impl From<ProbabilityClamp> for [f64; 2] {
    fn from(c: ProbabilityClamp) -> Self {
        [c.min, c.max]
    }
}

/// Weights `(x, y)` blending the mean and the maximum cumulative reward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct LargeRewardWeights {
    mean: f64,
    max: f64,
}

impl LargeRewardWeights {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x >= 0.0 && y >= 0.0) || (x + y - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "large_reward_weights",
                format!("need x, y >= 0 with x + y = 1, got ({x}, {y})"),
            ));
        }
        Ok(LargeRewardWeights { mean: x, max: y })
    }

    pub fn x(&self) -> f64 {
        self.mean
    }

    pub fn y(&self) -> f64 {
        self.max
    }
}

impl Default for LargeRewardWeights {
    fn default() -> Self {
        LargeRewardWeights { mean: 0.5, max: 0.5 }
    }
}

impl TryFrom<[f64; 2]> for LargeRewardWeights {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        LargeRewardWeights::new(v[0], v[1])
    }
}

impl From<LargeRewardWeights> for [f64; 2] {
    fn from(w: LargeRewardWeights) -> Self {
        [w.mean, w.max]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UpdatePolicy {
    pub mutation_rate: f64,
    pub base_affinity: f64,
    pub affinity_threshold_reward: f64,
    pub large_reward_weights: LargeRewardWeights,
}

impl Default for UpdatePolicy {
    fn default() -> Self {
        UpdatePolicy {
            mutation_rate: 0.01,
            base_affinity: 0.15,
            affinity_threshold_reward: 50.0,
            large_reward_weights: LargeRewardWeights::default(),
        }
    }
}

impl UpdatePolicy {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::param("update_policy.mutation_rate", "must lie in [0, 1]"));
        }
        if !(self.base_affinity >= 0.0 && self.base_affinity.is_finite()) {
            return Err(Error::param("update_policy.base_affinity", "must be finite and >= 0"));
        }
        if !(self.affinity_threshold_reward > 0.0 && self.affinity_threshold_reward.is_finite()) {
            return Err(Error::param(
                "update_policy.affinity_threshold_reward",
                "must be finite and > 0",
            ));
        }
        let w = self.large_reward_weights;
        LargeRewardWeights::new(w.x(), w.y())
            .map(|_| ())
            .map_err(|_| {
                Error::param(
                    "update_policy.large_reward_weights",
                    format!("need x, y >= 0 with x + y = 1, got ({}, {})", w.x(), w.y()),
                )
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BiasPolicy {
    pub bias: f64,
    pub threshold_bias: f64,
}

impl Default for BiasPolicy {
    fn default() -> Self {
        BiasPolicy {
            bias: 0.0,
            threshold_bias: 0.7,
        }
    }
}

impl BiasPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.bias >= 0.0 && self.bias.is_finite()) {
            return Err(Error::param("bias_policy.bias", "must be finite and >= 0"));
        }
        if !(self.threshold_bias > 0.0 && self.threshold_bias.is_finite()) {
            return Err(Error::param("bias_policy.threshold_bias", "must be finite and > 0"));
        }
        Ok(())
    }

    /// Probability that an expert with objective surprisal `s_hat` accepts
    /// the true outcome.
    pub fn agreement_probability(&self, s_hat: f64, mean_s_hat: f64) -> f64 {
        (-self.bias * s_hat / (mean_s_hat + self.threshold_bias)).exp()
    }
}

fn check_draw(nu: f64, what: &str) -> Result<()> {
    if nu > 0.0 && nu < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} draw {nu} outside (0, 1)")))
    }
}

/// Forecast probability for "yes" given belief `d`, the true outcome and a uniform draw.
///
/// The profile value is mirrored for a "no" outcome before clamping, so
/// clamped forecasts keep the yes/no symmetry.
pub fn sample_forecast(
    profile: &ForecastProfile,
    d: BeliefLevel,
    outcome: Outcome,
    nu: f64,
    clamp: &ProbabilityClamp,
) -> Result<f64> {
    check_draw(nu, "forecast")?;
    let p = profile.raw(d, nu);
    let p = match outcome {
        Outcome::Yes => p,
        Outcome::No => 1.0 - p,
    };
    Ok(clamp.apply(p))
}

/// Random walk: up with probability μ, then independently down with probability μ.
pub fn mutate_belief(d: BeliefLevel, mutation_rate: f64, nu_up: f64, nu_down: f64) -> BeliefLevel {
    let mut d = d;
    if nu_up < mutation_rate {
        d = d.increment();
    }
    if nu_down < mutation_rate {
        d = d.decrement();
    }
    d
}

/// The benchmark reward experts compare themselves against.
pub fn large_reward(mean_cumulative: f64, max_cumulative: f64, weights: LargeRewardWeights) -> f64 {
    weights.x() * mean_cumulative + weights.y() * max_cumulative
}

/// Affinity for this question, damped when little reward was handed out.
/// Nonpositive totals give zero affinity.
pub fn effective_affinity(base_affinity: f64, question_total_reward: f64, threshold_reward: f64) -> f64 {
    if question_total_reward <= 0.0 {
        return 0.0;
    }
    base_affinity * question_total_reward / (question_total_reward + threshold_reward)
}

/// Probability of keeping the current belief. One when there is nothing to
/// aspire to (`large <= 0`) or the expert is at or above the large reward.
pub fn keep_probability(cumulative: f64, large: f64, affinity: f64) -> f64 {
    let deficit = large - cumulative;
    if large <= 0.0 || deficit <= 0.0 {
        return 1.0;
    }
    (-affinity * deficit / large).exp()
}

pub fn reward_motivated_update(
    d: BeliefLevel,
    leader: BeliefLevel,
    cumulative: f64,
    large: f64,
    affinity: f64,
    nu: f64,
) -> BeliefLevel {
    if nu <= keep_probability(cumulative, large, affinity) {
        d
    } else {
        d.step_toward(leader)
    }
}

/// The expert's vote on the outcome: the truth, unless surprise plus bias
/// makes them reject it. Never abstains.
pub fn resolve_outcome(
    s_hat: f64,
    mean_s_hat: f64,
    outcome: Outcome,
    policy: &BiasPolicy,
    nu: f64,
) -> Resolution {
    if nu <= policy.agreement_probability(s_hat, mean_s_hat) {
        outcome.into()
    } else {
        outcome.flipped().into()
    }
}
