use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reward_sim_cli::commands::{cmd_calibrate, cmd_run, cmd_sweep, Overrides, SweepOverrides};
use reward_sim_cli::config::{parse_checkpoints, parse_grid, RunConfig};
use reward_sim_cli::CliError;

/// Simulate a prediction competition under the consensus-weighted surprisal reward.
#[derive(Parser)]
#[command(name = "reward-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Simulation seed (run, calibrate) or master seed (sweep).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated question indices to snapshot, e.g. 1,10,100,1000.
    #[arg(long)]
    checkpoints: Option<String>,
    /// Builtin initial-belief layout (split-10-10, contrarian-1, unanimous-neg, seed-2, seed-3, unanimous-pos).
    #[arg(long)]
    scenario: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its trajectory.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the (a0, b) plane and write a phase dataset and diagram.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Worker threads.
        #[arg(long)]
        workers: Option<usize>,
        /// Number of random (a0, b) samples.
        #[arg(long)]
        samples: Option<usize>,
        /// Grid A0_LO:A0_HI:N,B_LO:B_HI:N[,REPLICATES] instead of random samples.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Estimate r0 and the exit threshold from frozen-belief runs.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Questions per frozen-belief run.
        #[arg(long)]
        questions: Option<usize>,
    },
}

fn load(common: &Common, required: bool) -> Result<(RunConfig, Overrides), CliError> {
    let config = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None if required => return Err(CliError::Usage("--config is required".into())),
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        seed: common.seed,
        out: common.out.clone(),
        checkpoints: common.checkpoints.as_deref().map(parse_checkpoints).transpose()?,
        scenario: common.scenario.clone(),
    };
    Ok((config, overrides))
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { common } => {
            let (config, overrides) = load(&common, true)?;
            let out = cmd_run(config, &overrides)?;
            let t = &out.trajectory;
            println!(
                "{} questions, halted by stability: {}, final mean belief {}",
                t.halt_step,
                t.halted_by_stability,
                t.final_mean_belief().value()
            );
            println!("wrote {}", out.trajectory_path.display());
            println!("wrote {}", out.metadata_path.display());
        }
        Command::Sweep { common, workers, samples, grid } => {
            let (config, overrides) = load(&common, true)?;
            let sweep = SweepOverrides {
                workers,
                samples,
                grid: grid.as_deref().map(parse_grid).transpose()?,
            };
            let out = cmd_sweep(config, &overrides, &sweep)?;
            println!("{} samples", out.points.len());
            for path in [&out.dataset_path, &out.metadata_path, &out.plot_path] {
                println!("wrote {}", path.display());
            }
        }
        Command::Calibrate { common, questions } => {
            let (config, overrides) = load(&common, false)?;
            let report = cmd_calibrate(config, &overrides, questions)?;
            print!("{}", report.render());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
