//! File formats.
//!
//! # Trajectory file
//!
//! Tab-separated, one question per line, preceded by two comment lines:
//!
//! ```text
//! #reward-sim-trajectory v1
//! #meta {"format":...,"artifact_version":...,"generator":...,"seed":...,"params":{...},...}
//! j omega V q delta_s s_big r_total mean_d
//! 1 1 1 1 1.28... 2.93... 33.1... 0
//! ```
//!
//! Columns, in this exact order:
//!
//! | column    | meaning                                                  |
//! |-----------|----------------------------------------------------------|
//! | `j`       | 1-based question index                                   |
//! | `omega`   | true outcome, `1` or `-1`                                |
//! | `V`       | mean resolution                                          |
//! | `q`       | effective outcome, `1`, `-1` or `0`                      |
//! | `delta_s` | standard deviation of surprisals, `NA` when `q = 0`      |
//! | `s_big`   | big surprisal, `NA` when `q = 0`                         |
//! | `r_total` | total reward paid on the question                        |
//! | `mean_d`  | mean degree of belief after the question's updates       |
//!
//! Floats use Rust's shortest round-trip formatting, so files are
//! byte-identical across runs with the same inputs.
//!
//! # Phase dataset
//!
//! Comma-separated with a header row:
//! `sample_index,a0,b,mean_belief_j<c>...,final_mean_belief,halted,halt_step,classification`,
//! one `mean_belief_j<c>` column per checkpoint in spec order. A JSON sidecar
//! ([`SweepMetadata`]) carries the full sweep spec and generator identity.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::engine::{MeanBelief, SimulationParams, Trajectory};
use crate::error::{Error, Result};
use crate::sweep::{Classification, PhasePoint, SweepSpec};

pub const TRAJECTORY_FORMAT: &str = "reward-sim-trajectory v1";
pub const PHASE_FORMAT: &str = "reward-sim-phase v1";
pub const ARTIFACT_VERSION: &str = concat!("reward-sim ", env!("CARGO_PKG_VERSION"));
pub const TRAJECTORY_COLUMNS: [&str; 8] =
    ["j", "omega", "V", "q", "delta_s", "s_big", "r_total", "mean_d"];
pub const CHILD_SEED_RULE: &str =
    "splitmix64(master_seed + 0x9E3779B97F4A7C15 * (sample_index + 1)), wrapping";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetadata {
    pub format: String,
    pub artifact_version: String,
    pub generator: String,
    pub seed: u64,
    pub params: SimulationParams,
    pub halted_by_stability: bool,
    pub halt_step: usize,
    pub snapshots: BTreeMap<usize, MeanBelief>,
}

impl TrajectoryMetadata {
    pub fn of(t: &Trajectory) -> Self {
        TrajectoryMetadata {
            format: TRAJECTORY_FORMAT.to_string(),
            artifact_version: ARTIFACT_VERSION.to_string(),
            generator: t.generator.clone(),
            seed: t.params.seed,
            params: t.params.clone(),
            halted_by_stability: t.halted_by_stability,
            halt_step: t.halt_step,
            snapshots: t.snapshots.clone(),
        }
    }
}

/// One parsed data line of a trajectory file.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub j: usize,
    pub omega: i8,
    pub mean_resolution: f64,
    pub effective_outcome: i8,
    pub delta_s: Option<f64>,
    pub s_big: Option<f64>,
    pub r_total: f64,
    pub mean_d: f64,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

pub fn write_trajectory<W: Write>(t: &Trajectory, mut w: W) -> Result<()> {
    if t.records.is_empty() {
        return Err(Error::InvalidInput(
            "trajectory has no per-question records to write".into(),
        ));
    }
    writeln!(w, "#{TRAJECTORY_FORMAT}")?;
    writeln!(w, "#meta {}", serde_json::to_string(&TrajectoryMetadata::of(t))?)?;
    writeln!(w, "{}", TRAJECTORY_COLUMNS.join("\t"))?;
    for rec in &t.records {
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            rec.index,
            rec.objective_outcome.sign(),
            rec.consensus.mean_resolution,
            rec.consensus.effective_sign(),
            opt(rec.stats.map(|s| s.std_dev)),
            opt(rec.stats.map(|s| s.big)),
            rec.total_reward,
            rec.mean_belief_after().value(),
        )?;
    }
    Ok(())
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("trajectory line {line}: {msg}"))
}

fn field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| bad(line, format!("bad {name} `{s}`")))
}

fn opt_field(line: usize, name: &str, s: &str) -> Result<Option<f64>> {
    if s == "NA" {
        Ok(None)
    } else {
        field(line, name, s).map(Some)
    }
}

/// Parse a trajectory file back into its metadata and rows.
pub fn read_trajectory<R: BufRead>(r: R) -> Result<(TrajectoryMetadata, Vec<TrajectoryRow>)> {
    let mut lines = r.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, l)) => Ok((i + 1, l?)),
            None => Err(Error::InvalidInput(format!("trajectory truncated before {what}"))),
        }
    };
    let (n, magic) = next("format line")?;
    if magic != format!("#{TRAJECTORY_FORMAT}") {
        return Err(bad(n, format!("unrecognized format `{magic}`")));
    }
    let (n, meta) = next("metadata")?;
    let meta = meta
        .strip_prefix("#meta ")
        .ok_or_else(|| bad(n, "missing #meta prefix"))?;
    let meta: TrajectoryMetadata = serde_json::from_str(meta)?;
    let (n, header) = next("header")?;
    if header != TRAJECTORY_COLUMNS.join("\t") {
        return Err(bad(n, format!("unexpected header `{header}`")));
    }

    let mut rows = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        let line = line?;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != TRAJECTORY_COLUMNS.len() {
            return Err(bad(n, format!("expected 8 columns, found {}", cols.len())));
        }
        rows.push(TrajectoryRow {
            j: field(n, "j", cols[0])?,
            omega: field(n, "omega", cols[1])?,
            mean_resolution: field(n, "V", cols[2])?,
            effective_outcome: field(n, "q", cols[3])?,
            delta_s: opt_field(n, "delta_s", cols[4])?,
            s_big: opt_field(n, "s_big", cols[5])?,
            r_total: field(n, "r_total", cols[6])?,
            mean_d: field(n, "mean_d", cols[7])?,
        });
    }
    Ok((meta, rows))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub format: String,
    pub artifact_version: String,
    pub generator: String,
    pub child_seed_rule: String,
    pub spec: SweepSpec,
    pub columns: Vec<String>,
}

impl SweepMetadata {
    pub fn new(spec: &SweepSpec) -> Self {
        SweepMetadata {
            format: PHASE_FORMAT.to_string(),
            artifact_version: ARTIFACT_VERSION.to_string(),
            generator: crate::rng::GENERATOR_ID.to_string(),
            child_seed_rule: CHILD_SEED_RULE.to_string(),
            spec: spec.clone(),
            columns: phase_columns(&spec.checkpoints),
        }
    }
}

pub fn phase_columns(checkpoints: &[usize]) -> Vec<String> {
    let mut cols = vec!["sample_index".to_string(), "a0".to_string(), "b".to_string()];
    cols.extend(checkpoints.iter().map(|c| format!("mean_belief_j{c}")));
    cols.extend(
        ["final_mean_belief", "halted", "halt_step", "classification"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols
}

pub fn write_phase_dataset<W: Write>(
    points: &[PhasePoint],
    checkpoints: &[usize],
    mut w: W,
) -> Result<()> {
    writeln!(w, "{}", phase_columns(checkpoints).join(","))?;
    for p in points {
        let mut row = vec![p.sample_index.to_string(), p.a0.to_string(), p.b.to_string()];
        for &c in checkpoints {
            let m = p
                .mean_at(c)
                .ok_or_else(|| Error::InvalidInput(format!("sample {} lacks checkpoint {c}", p.sample_index)))?;
            row.push(m.value().to_string());
        }
        row.push(p.final_mean.value().to_string());
        row.push(p.halted_by_stability.to_string());
        row.push(p.halt_step.to_string());
        row.push(p.classification.to_string());
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// A parsed phase-dataset row.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRow {
    pub sample_index: usize,
    pub a0: f64,
    pub b: f64,
    pub checkpoint_means: Vec<(usize, f64)>,
    pub final_mean_belief: f64,
    pub halted: bool,
    pub halt_step: usize,
    pub classification: Classification,
}

pub fn read_phase_dataset<R: BufRead>(r: R) -> Result<Vec<PhaseRow>> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty phase dataset".into()))??;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 7 || cols[..3] != ["sample_index", "a0", "b"] {
        return Err(Error::InvalidInput(format!("unexpected header `{header}`")));
    }
    let checkpoints = cols[3..cols.len() - 4]
        .iter()
        .map(|c| {
            c.strip_prefix("mean_belief_j")
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| Error::InvalidInput(format!("bad checkpoint column `{c}`")))
        })
        .collect::<Result<Vec<usize>>>()?;

    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let line = line?;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() {
            return Err(Error::InvalidInput(format!("phase line {n}: wrong column count")));
        }
        let k = checkpoints.len();
        let classification = match f[3 + k + 3] {
            "belief" => Classification::Belief,
            "disbelief" => Classification::Disbelief,
            "undecided" => Classification::Undecided,
            other => return Err(Error::InvalidInput(format!("phase line {n}: bad class `{other}`"))),
        };
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::InvalidInput(format!("phase line {n}: bad number `{s}`")))
        };
        rows.push(PhaseRow {
            sample_index: num(f[0])? as usize,
            a0: num(f[1])?,
            b: num(f[2])?,
            checkpoint_means: checkpoints
                .iter()
                .zip(&f[3..3 + k])
                .map(|(&c, s)| num(s).map(|v| (c, v)))
                .collect::<Result<_>>()?,
            final_mean_belief: num(f[3 + k])?,
            halted: f[3 + k + 1] == "true",
            halt_step: num(f[3 + k + 2])? as usize,
            classification,
        });
    }
    Ok(rows)
}
