//! Implementations of the subcommands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use reward_sim::io::{write_phase_dataset, write_trajectory, SweepMetadata, TrajectoryMetadata};
use reward_sim::sweep::{
    affinity_threshold_from, calibrate, reward_threshold_from, run_sweep, Calibration, PhasePoint,
    Sampling,
};
use reward_sim::{freeze_beliefs_run, run, Trajectory};

use crate::config::{lookup_scenario, RunConfig};
use crate::render::render_phase_svg;
use crate::CliError;

pub const TRAJECTORY_FILE: &str = "trajectory.tsv";
pub const TRAJECTORY_META_FILE: &str = "trajectory.meta.json";
pub const PHASE_FILE: &str = "phase.csv";
pub const PHASE_META_FILE: &str = "phase.meta.json";
pub const PHASE_PLOT_FILE: &str = "phase.svg";
pub const DEFAULT_CALIBRATION_QUESTIONS: usize = 10_000;

/// Command-line overrides shared by the subcommands.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub checkpoints: Option<Vec<usize>>,
    pub scenario: Option<String>,
}

impl Overrides {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(c) = &self.checkpoints {
            config.simulation.checkpoints = c.clone();
        }
        if let Some(s) = &self.scenario {
            config.scenario = Some(s.clone());
        }
        if let Some(out) = &self.out {
            config.output_dir = Some(out.clone());
        }
    }

    fn out_dir(config: &RunConfig) -> PathBuf {
        config.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))
}

fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<(), CliError>) -> Result<(), CliError> {
    let ctx = || format!("writing {}", path.display());
    let file = File::create(path).map_err(|e| CliError::io(ctx(), e))?;
    let mut w = BufWriter::new(file);
    write(&mut w)?;
    w.flush().map_err(|e| CliError::io(ctx(), e))
}

fn json_to(w: &mut impl Write, value: &impl serde::Serialize) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::Internal(e.to_string()))?;
    writeln!(w).map_err(|e| CliError::io("writing metadata", e))
}

/// What `run` produced.
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub trajectory_path: PathBuf,
    pub metadata_path: PathBuf,
}

pub fn cmd_run(mut config: RunConfig, overrides: &Overrides) -> Result<RunOutput, CliError> {
    overrides.apply(&mut config);
    let mut params = config.simulation_params()?;
    if let Some(seed) = overrides.seed {
        params.seed = seed;
    }
    let trajectory = run(&params)?;
    trajectory.check_invariants()?;

    let dir = Overrides::out_dir(&config);
    create_dir(&dir)?;
    let trajectory_path = dir.join(TRAJECTORY_FILE);
    let metadata_path = dir.join(TRAJECTORY_META_FILE);
    write_file(&trajectory_path, |w| Ok(write_trajectory(&trajectory, w)?))?;
    write_file(&metadata_path, |w| json_to(w, &TrajectoryMetadata::of(&trajectory)))?;
    Ok(RunOutput {
        trajectory,
        trajectory_path,
        metadata_path,
    })
}

#[derive(Clone, Debug, Default)]
pub struct SweepOverrides {
    pub workers: Option<usize>,
    pub samples: Option<usize>,
    pub grid: Option<Sampling>,
}

pub struct SweepOutput {
    pub points: Vec<PhasePoint>,
    pub dataset_path: PathBuf,
    pub metadata_path: PathBuf,
    pub plot_path: PathBuf,
}

pub fn cmd_sweep(
    mut config: RunConfig,
    overrides: &Overrides,
    sweep: &SweepOverrides,
) -> Result<SweepOutput, CliError> {
    overrides.apply(&mut config);
    let mut settings = config.sweep.clone().unwrap_or_default();
    if let Some(seed) = overrides.seed {
        settings.master_seed = seed;
    }
    if let Some(grid) = &sweep.grid {
        settings.sampling = grid.clone();
    }
    if let Some(n) = sweep.samples {
        settings.sampling = match settings.sampling {
            Sampling::Random { a0_range, b_range, .. } => Sampling::Random {
                count: n,
                a0_range,
                b_range,
            },
            Sampling::Grid { .. } => {
                return Err(CliError::Usage("--samples applies to random sampling, not a grid".into()))
            }
        };
    }
    config.sweep = Some(settings);
    let spec = config.sweep_spec()?;
    let workers = sweep
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }

    let points = run_sweep(&spec, workers)?;

    let dir = Overrides::out_dir(&config);
    create_dir(&dir)?;
    let dataset_path = dir.join(PHASE_FILE);
    let metadata_path = dir.join(PHASE_META_FILE);
    let plot_path = dir.join(PHASE_PLOT_FILE);
    write_file(&dataset_path, |w| Ok(write_phase_dataset(&points, &spec.checkpoints, w)?))?;
    write_file(&metadata_path, |w| json_to(w, &SweepMetadata::new(&spec)))?;
    let svg = render_phase_svg(&points, &spec.checkpoints, &spec.sampling);
    write_file(&plot_path, |w| {
        w.write_all(svg.as_bytes()).map_err(|e| CliError::io("writing plot", e))
    })?;
    Ok(SweepOutput {
        points,
        dataset_path,
        metadata_path,
        plot_path,
    })
}

/// Calibration result; a single-scenario calibration fills only one threshold.
#[derive(Clone, Debug, PartialEq)]
pub enum CalibrationReport {
    Both(Calibration),
    AffinityOnly { scenario: String, mean_total: f64, affinity_threshold_reward: f64, n_questions: usize },
    ThresholdOnly { scenario: String, mean_total: f64, reward_threshold: f64, n_questions: usize },
}

impl CalibrationReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let n = match self {
            CalibrationReport::Both(c) => {
                s += &format!("split-10-10 mean total reward: {}\n", c.split_mean_total);
                s += &format!("unanimous-pos mean total reward: {}\n", c.unanimous_mean_total);
                s += &format!("r0 (affinity_threshold_reward) = {}\n", c.affinity_threshold_reward);
                s += &format!("r_threshold (reward_threshold) = {}\n", c.reward_threshold);
                s += &format!(
                    "recommended config: {{\"simulation\": {{\"update_policy\": {{\"affinity_threshold_reward\": {}}}, \"reward_threshold\": {}}}}}\n",
                    c.affinity_threshold_reward, c.reward_threshold
                );
                c.n_questions
            }
            CalibrationReport::AffinityOnly { scenario, mean_total, affinity_threshold_reward, n_questions } => {
                s += &format!("{scenario} mean total reward: {mean_total}\n");
                s += &format!("r0 (affinity_threshold_reward) = {affinity_threshold_reward}\n");
                s += &format!(
                    "recommended config: {{\"simulation\": {{\"update_policy\": {{\"affinity_threshold_reward\": {affinity_threshold_reward}}}}}}}\n"
                );
                *n_questions
            }
            CalibrationReport::ThresholdOnly { scenario, mean_total, reward_threshold, n_questions } => {
                s += &format!("{scenario} mean total reward: {mean_total}\n");
                s += &format!("r_threshold (reward_threshold) = {reward_threshold}\n");
                s += &format!("recommended config: {{\"simulation\": {{\"reward_threshold\": {reward_threshold}}}}}\n");
                *n_questions
            }
        };
        if n < 1000 {
            s += &format!("note: only {n} questions; estimates have high variance (use >= 1000)\n");
        }
        s
    }
}

/// Estimate r0 and the exit threshold from frozen-belief runs. With a
/// scenario override only one estimate is produced: the exit threshold for
/// a unanimous layout, r0 otherwise.
pub fn cmd_calibrate(
    mut config: RunConfig,
    overrides: &Overrides,
    questions: Option<usize>,
) -> Result<CalibrationReport, CliError> {
    overrides.apply(&mut config);
    let n = questions
        .or(config.calibration_questions)
        .unwrap_or(DEFAULT_CALIBRATION_QUESTIONS);
    if n == 0 {
        return Err(CliError::Usage("--questions must be at least 1".into()));
    }
    let mut base = config.simulation.clone();
    if let Some(seed) = overrides.seed {
        base.seed = seed;
    }
    match &config.scenario {
        None => Ok(CalibrationReport::Both(calibrate(&base, n)?)),
        Some(name) => {
            let scenario = lookup_scenario(name)?;
            let mean_total = freeze_beliefs_run(&scenario.apply(base), n)?;
            if scenario.is_unanimous() {
                Ok(CalibrationReport::ThresholdOnly {
                    scenario: scenario.name,
                    mean_total,
                    reward_threshold: reward_threshold_from(mean_total),
                    n_questions: n,
                })
            } else {
                Ok(CalibrationReport::AffinityOnly {
                    scenario: scenario.name,
                    mean_total,
                    affinity_threshold_reward: affinity_threshold_from(mean_total),
                    n_questions: n,
                })
            }
        }
    }
}
