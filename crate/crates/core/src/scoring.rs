//! The consensus-weighted surprisal reward rule.
//!
//! For one question the reward of expert `i` is
//!
//! ```text
//! r_i = (s_big - s_i) * Δs * |V|
//! ```
//!
//! where `s_i` is the surprisal of the expert's forecast against the group's
//! effective outcome, `Δs` the population standard deviation of surprisals,
//! `s_big = <s> + c Δs`, and `|V|` the absolute mean resolution. Summed over
//! the group this gives `c N Δs² |V|`.
//!
//! Everything here is a pure function of its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variance below this magnitude is treated as floating-point noise.
const VARIANCE_ROUNDOFF: f64 = 1e-9;

/// A binary question outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Outcome {
    Yes,
    No,
}

impl Outcome {
    pub fn sign(self) -> i8 {
        match self {
            Outcome::Yes => 1,
            Outcome::No => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Yes => Outcome::No,
            Outcome::No => Outcome::Yes,
        }
    }

    pub fn from_sign(sign: i64) -> Option<Self> {
        match sign.signum() {
            1 => Some(Outcome::Yes),
            -1 => Some(Outcome::No),
            _ => None,
        }
    }
}

impl TryFrom<i8> for Outcome {
    type Error = Error;

    fn try_from(value: i8) -> Result<Self> {
        match value {
            1 => Ok(Outcome::Yes),
            -1 => Ok(Outcome::No),
            other => Err(Error::InvalidInput(format!("outcome must be ±1, got {other}"))),
        }
    }
}

impl From<Outcome> for i8 {
    fn from(o: Outcome) -> i8 {
        o.sign()
    }
}

/// An expert's asserted judgment of a question's outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Resolution {
    No,
    Abstain,
    Yes,
}

impl Resolution {
    pub fn value(self) -> i8 {
        match self {
            Resolution::No => -1,
            Resolution::Abstain => 0,
            Resolution::Yes => 1,
        }
    }
}

impl From<Outcome> for Resolution {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Yes => Resolution::Yes,
            Outcome::No => Resolution::No,
        }
    }
}

impl TryFrom<i8> for Resolution {
    type Error = Error;

    fn try_from(value: i8) -> Result<Self> {
        match value {
            -1 => Ok(Resolution::No),
            0 => Ok(Resolution::Abstain),
            1 => Ok(Resolution::Yes),
            other => Err(Error::InvalidInput(format!(
                "resolution must be in {{-1, 0, 1}}, got {other}"
            ))),
        }
    }
}

impl From<Resolution> for i8 {
    fn from(r: Resolution) -> i8 {
        r.value()
    }
}

/// Mean resolution of the group and the outcome it implies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsensusSummary {
    /// Sum of resolution values; `mean_resolution * participant_count`.
    pub resolution_sum: i64,
    pub mean_resolution: f64,
    pub consensus: f64,
    /// `None` when the group is exactly split.
    pub effective_outcome: Option<Outcome>,
    pub participant_count: usize,
}

impl ConsensusSummary {
    /// Effective outcome as an integer in {-1, 0, +1}.
    pub fn effective_sign(&self) -> i8 {
        self.effective_outcome.map_or(0, Outcome::sign)
    }
}

/// Population moments of the surprisals on one question.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurprisalStats {
    pub mean: f64,
    pub mean_square: f64,
    pub std_dev: f64,
    pub big: f64,
    pub breadth_constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardVector {
    pub per_expert: Vec<f64>,
    pub total: f64,
}

impl RewardVector {
    fn zeros(n: usize) -> Self {
        RewardVector {
            per_expert: vec![0.0; n],
            total: 0.0,
        }
    }
}

/// Everything computed when a question is scored.
#[derive(Clone, Debug, PartialEq)]
pub struct QuestionScore {
    pub consensus: ConsensusSummary,
    /// Surprisals against the effective outcome; absent for a split vote.
    pub surprisals: Option<Vec<f64>>,
    pub stats: Option<SurprisalStats>,
    pub rewards: RewardVector,
}

impl QuestionScore {
    pub fn is_resolved(&self) -> bool {
        self.consensus.effective_outcome.is_some()
    }
}

pub fn consensus_summary(resolutions: &[Resolution]) -> Result<ConsensusSummary> {
    if resolutions.is_empty() {
        return Err(Error::InvalidInput("no resolutions supplied".into()));
    }
    let n = resolutions.len();
    let sum: i64 = resolutions.iter().map(|r| i64::from(r.value())).sum();
    let mean = sum as f64 / n as f64;
    Ok(ConsensusSummary {
        resolution_sum: sum,
        mean_resolution: mean,
        consensus: mean.abs(),
        effective_outcome: Outcome::from_sign(sum),
        participant_count: n,
    })
}

/// Surprisal `-ln p` of a forecast `p` for "yes", measured against `outcome`.
pub fn surprisal(p: f64, outcome: Outcome) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    let assigned = match outcome {
        Outcome::Yes => p,
        Outcome::No => 1.0 - p,
    };
    if assigned <= 0.0 {
        return Err(Error::Domain(format!(
            "forecast {p} gives zero probability to the realized outcome"
        )));
    }
    Ok(-assigned.ln())
}

pub fn surprisal_stats(surprisals: &[f64], breadth_constant: f64) -> Result<SurprisalStats> {
    if surprisals.is_empty() {
        return Err(Error::InvalidInput("no surprisals supplied".into()));
    }
    let n = surprisals.len() as f64;
    let mean = surprisals.iter().sum::<f64>() / n;
    let mean_square = surprisals.iter().map(|s| s * s).sum::<f64>() / n;
    let mut variance = mean_square - mean * mean;
    if variance < 0.0 {
        if variance < -VARIANCE_ROUNDOFF {
            return Err(Error::Domain(format!("negative variance {variance}")));
        }
        variance = 0.0;
    }
    let std_dev = variance.sqrt();
    Ok(SurprisalStats {
        mean,
        mean_square,
        std_dev,
        big: mean + breadth_constant * std_dev,
        breadth_constant,
    })
}

/// Score one question: consensus, surprisals against the effective outcome,
/// and per-expert rewards. A split vote pays nothing.
pub fn score_question(
    forecasts: &[f64],
    resolutions: &[Resolution],
    breadth_constant: f64,
) -> Result<QuestionScore> {
    if forecasts.len() != resolutions.len() {
        return Err(Error::InvalidInput(format!(
            "{} forecasts but {} resolutions",
            forecasts.len(),
            resolutions.len()
        )));
    }
    let consensus = consensus_summary(resolutions)?;
    let Some(outcome) = consensus.effective_outcome else {
        return Ok(QuestionScore {
            consensus,
            surprisals: None,
            stats: None,
            rewards: RewardVector::zeros(forecasts.len()),
        });
    };

    let surprisals = forecasts
        .iter()
        .map(|&p| surprisal(p, outcome))
        .collect::<Result<Vec<_>>>()?;
    let stats = surprisal_stats(&surprisals, breadth_constant)?;
    let weight = stats.std_dev * consensus.consensus;
    let per_expert: Vec<f64> = surprisals.iter().map(|s| (stats.big - s) * weight).collect();
    let total = per_expert.iter().sum();

    Ok(QuestionScore {
        consensus,
        surprisals: Some(surprisals),
        stats: Some(stats),
        rewards: RewardVector { per_expert, total },
    })
}

/// Closed form of the total reward, `c N Δs² |V|`.
pub fn closed_form_total(stats: &SurprisalStats, consensus: &ConsensusSummary) -> f64 {
    stats.breadth_constant
        * consensus.participant_count as f64
        * stats.std_dev
        * stats.std_dev
        * consensus.consensus
}
