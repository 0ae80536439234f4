//! The run configuration file.
//!
//! JSON, every key optional, unknown keys rejected:
//!
//! ```json
//! {
//!   "simulation": { "update_policy": { "base_affinity": 0.2 }, "bias_policy": { "bias": 0.3 }, "seed": 7 },
//!   "scenario": "contrarian-1",
//!   "sweep": { "sampling": { "kind": "random", "count": 3000, "a0_range": [0, 0.3], "b_range": [0, 1.2] },
//!              "master_seed": 1, "preset": "b0-1.4" },
//!   "calibration_questions": 10000,
//!   "output_dir": "out"
//! }
//! ```

use std::path::{Path, PathBuf};

use reward_sim::sweep::{robustness_presets, Sampling, Scenario, SweepSpec};
use reward_sim::SimulationParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub simulation: SimulationParams,
    /// Builtin layout name; replaces `simulation.initial_beliefs` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration_questions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub sampling: Sampling,
    pub master_seed: u64,
    /// Robustness preset applied on top of `simulation`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
}

pub fn lookup_scenario(name: &str) -> Result<Scenario, CliError> {
    Scenario::named(name).ok_or_else(|| CliError::Usage(format!("unknown scenario `{name}`")))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Simulation parameters with the scenario applied, validated.
    pub fn simulation_params(&self) -> Result<SimulationParams, CliError> {
        let params = match &self.scenario {
            Some(name) => lookup_scenario(name)?.apply(self.simulation.clone()),
            None => self.simulation.clone(),
        };
        params.validate()?;
        Ok(params)
    }

    /// The sweep described by this config. Without a `scenario` key the
    /// sweep uses the configured initial beliefs as a custom layout.
    pub fn sweep_spec(&self) -> Result<SweepSpec, CliError> {
        let sweep = self.sweep.clone().unwrap_or_default();
        let mut base = self.simulation.clone();
        if let Some(name) = &sweep.preset {
            let preset = robustness_presets()
                .into_iter()
                .find(|p| &p.name == name)
                .ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
            base = preset.apply(base)?;
        }
        let scenario = match &self.scenario {
            Some(name) => lookup_scenario(name)?,
            None => Scenario::new(
                "custom",
                base.initial_beliefs.iter().map(|&d| (1, d)).collect(),
            ),
        };
        let mut spec = SweepSpec::new(base, scenario, sweep.sampling);
        spec.master_seed = sweep.master_seed;
        spec.validate()?;
        Ok(spec)
    }
}

/// Parse `1,10,100` into checkpoint indices.
pub fn parse_checkpoints(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|part| {
            let part = part.trim();
            match part.parse::<usize>() {
                Ok(0) | Err(_) => Err(CliError::Usage(format!("bad checkpoint `{part}`"))),
                Ok(v) => Ok(v),
            }
        })
        .collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn parse_axis(axis: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let err = || CliError::Usage(format!("bad {axis} grid axis `{s}`, expected LO:HI:COUNT"));
    if parts.len() != 3 {
        return Err(err());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| err())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| err())?;
    let n: usize = parts[2].trim().parse().map_err(|_| err())?;
    if !(lo.is_finite() && hi.is_finite()) || hi < lo || n == 0 {
        return Err(CliError::Usage(format!("empty {axis} range `{s}`")));
    }
    Ok(linspace(lo, hi, n))
}

/// Parse `A0_LO:A0_HI:N,B_LO:B_HI:N[,REPLICATES]` into grid sampling.
pub fn parse_grid(s: &str) -> Result<Sampling, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(CliError::Usage(format!(
            "bad grid `{s}`, expected A0_LO:A0_HI:N,B_LO:B_HI:N[,REPLICATES]"
        )));
    }
    let replicates = match parts.get(2) {
        Some(r) => r
            .trim()
            .parse()
            .ok()
            .filter(|&r: &usize| r > 0)
            .ok_or_else(|| CliError::Usage(format!("bad replicate count `{r}`")))?,
        None => 1,
    };
    Ok(Sampling::Grid {
        a0_values: parse_axis("a0", parts[0])?,
        b_values: parse_axis("b", parts[1])?,
        replicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_all_defaults() {
        let c = RunConfig::from_json("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        c.simulation_params().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"simulaton": {}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"simulation": {"n_expert": 3}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"sweep": {"sampling": {"kind": "random", "count": 3, "a0_range": [0, 1], "b_range": [0, 1], "extra": 1}}}"#).is_err());
    }

    #[test]
    fn weights_must_sum_to_one() {
        let err = RunConfig::from_json(
            r#"{"simulation": {"update_policy": {"large_reward_weights": [0.5, 0.6]}}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("large_reward_weights"), "{err}");
    }

    #[test]
    fn scenario_overrides_beliefs() {
        let c = RunConfig::from_json(r#"{"scenario": "contrarian-1"}"#).unwrap();
        let p = c.simulation_params().unwrap();
        assert_eq!(p.initial_beliefs.iter().filter(|d| d.value() == 4).count(), 1);
        assert!(RunConfig::from_json(r#"{"scenario": "bogus"}"#)
            .unwrap()
            .simulation_params()
            .is_err());
    }

    #[test]
    fn checkpoint_lists() {
        assert_eq!(parse_checkpoints("1,10, 100").unwrap(), vec![1, 10, 100]);
        assert!(parse_checkpoints("0,5").is_err());
        assert!(parse_checkpoints("a").is_err());
    }

    #[test]
    fn grid_specs() {
        let g = parse_grid("0:0.3:4,0:1.2:3,2").unwrap();
        assert_eq!(g.len(), 24);
        match g {
            Sampling::Grid { a0_values, b_values, replicates } => {
                assert_eq!(a0_values.len(), 4);
                assert!((a0_values[3] - 0.3).abs() < 1e-15);
                assert_eq!(b_values, vec![0.0, 0.6, 1.2]);
                assert_eq!(replicates, 2);
            }
            _ => unreachable!(),
        }
        assert!(parse_grid("0:0.3:4,1.2:0:3").is_err());
        assert!(parse_grid("0:0.3:4,0:1:0").is_err());
        assert!(parse_grid("0:0.3:4").is_err());
    }

    #[test]
    fn presets_are_resolved() {
        let c = RunConfig::from_json(r#"{"sweep": {"preset": "b0-2.3"}}"#).unwrap();
        assert_eq!(c.sweep_spec().unwrap().base_params.bias_policy.threshold_bias, 2.3);
        let c = RunConfig::from_json(r#"{"sweep": {"preset": "nope"}}"#).unwrap();
        assert!(c.sweep_spec().is_err());
    }
}
