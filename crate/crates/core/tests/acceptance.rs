//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;
use reward_sim::io::{write_phase_dataset, write_trajectory};
use reward_sim::sweep::{unanimous_positive, Classification};
use reward_sim::{
    child_seed, freeze_beliefs_run, run, run_sweep, score_question, BeliefLevel, BiasPolicy,
    ForecastProfile, Outcome, ProbabilityClamp, Resolution, Sampling, Scenario, SimRng,
    SimulationParams, SweepSpec, Trajectory, UniformSource,
};

const MASTER_SEED: u64 = 20_240_601;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: &str, name: &str, pass: bool, detail: String, started: Instant) {
        if !pass {
            self.failures += 1;
        }
        println!(
            "{} [{id}] {name}: {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    }
}

fn scenario(name: &str) -> Scenario {
    Scenario::named(name).unwrap_or_else(|| panic!("scenario {name}"))
}

fn params_for(scenario: &Scenario, a0: f64, b: f64, mu: f64, seed: u64) -> SimulationParams {
    let mut p = scenario.apply(SimulationParams::default());
    p.update_policy.base_affinity = a0;
    p.update_policy.mutation_rate = mu;
    p.bias_policy.bias = b;
    p.seed = seed;
    p
}

/// Run `runs` independent simulations with child seeds of `stream`.
fn ensemble(runs: usize, stream: u64, make: impl Fn(u64) -> SimulationParams + Sync) -> Vec<Trajectory> {
    (0..runs)
        .into_par_iter()
        .map(|i| run(&make(child_seed(MASTER_SEED ^ stream, i as u64))).expect("run"))
        .collect()
}

fn fraction(ts: &[Trajectory], pred: impl Fn(&Trajectory) -> bool) -> f64 {
    ts.iter().filter(|t| pred(t)).count() as f64 / ts.len() as f64
}

fn belief_at(t: &Trajectory, j: usize) -> bool {
    Classification::of(t.mean_belief_at(j).expect("snapshot")) == Classification::Belief
}

fn reaches_positive_by(t: &Trajectory, j: usize) -> bool {
    t.records
        .iter()
        .take_while(|r| r.index <= j)
        .any(|r| r.mean_belief_after().sum > 0)
}

fn reward_identity(rep: &mut Report) {
    let started = Instant::now();
    let mut rng = SimRng::seed_from_u64(MASTER_SEED);
    let mut max_err = 0.0f64;
    let mut scored = 0;
    for _ in 0..10_000 {
        let n = 2 + (rng.next_open01() * 40.0) as usize;
        let c = rng.next_open01() * 3.0;
        let forecasts: Vec<f64> = (0..n).map(|_| 0.01 + 0.98 * rng.next_open01()).collect();
        let resolutions: Vec<Resolution> = (0..n)
            .map(|_| match (rng.next_open01() * 3.0) as u8 {
                0 => Resolution::No,
                1 => Resolution::Abstain,
                _ => Resolution::Yes,
            })
            .collect();
        let score = score_question(&forecasts, &resolutions, c).expect("score");
        let expected = match &score.stats {
            Some(s) => c * n as f64 * s.std_dev * s.std_dev * score.consensus.consensus,
            None => 0.0,
        };
        let sum: f64 = score.rewards.per_expert.iter().sum();
        max_err = max_err.max((sum - expected).abs());
        scored += score.stats.is_some() as usize;
    }
    rep.check(
        "1",
        "reward identity",
        max_err <= 1e-9,
        format!("10000 questions ({scored} resolved), max |sum r - cN ds^2 |V|| = {max_err:.3e}, tol 1e-9"),
        started,
    );
}

fn forecast_calibration(rep: &mut Report) {
    let started = Instant::now();
    let profile = ForecastProfile::default();
    let mut rng = SimRng::seed_from_u64(MASTER_SEED + 2);
    let mut means = Vec::new();
    let mut ok = true;
    let mut worst = 0.0f64;
    for d in 0..=4i8 {
        let level = BeliefLevel::new(d).unwrap();
        let k = profile.exponent(level);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| {
                reward_sim::agents::sample_forecast(&profile, level, Outcome::Yes, rng.next_open01(), &ProbabilityClamp::UNIT)
                    .unwrap()
            })
            .sum::<f64>()
            / n as f64;
        let err = (mean - k / (k + 1.0)).abs();
        worst = worst.max(err);
        ok &= err <= 0.005;
        means.push(mean);
    }
    let increments: Vec<f64> = means.windows(2).map(|w| w[1] - w[0]).collect();
    ok &= increments.iter().all(|i| (i - 0.114).abs() <= 0.01);
    rep.check(
        "2",
        "forecast calibration",
        ok,
        format!(
            "means {:?}, max |mean - k/(k+1)| = {worst:.4} (tol 0.005), increments {:?} (0.114 +- 0.01)",
            means.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>(),
            increments.iter().map(|i| format!("{i:.4}")).collect::<Vec<_>>()
        ),
        started,
    );
}

fn calibration_constants(rep: &mut Report) {
    let started = Instant::now();
    let split = params_for(&scenario("split-10-10"), 0.0, 0.0, 0.01, MASTER_SEED + 3);
    let unanimous = params_for(&unanimous_positive(), 0.0, 0.0, 0.01, MASTER_SEED + 4);
    let split_mean = freeze_beliefs_run(&split, 10_000).unwrap();
    let unanimous_mean = freeze_beliefs_run(&unanimous, 10_000).unwrap();
    let within = |v: f64, target: f64| (v - target).abs() <= 0.3 * target;
    rep.check(
        "3",
        "calibration constants",
        within(split_mean, 100.0) && within(unanimous_mean, 2.02),
        format!(
            "split-10-10 <r_total> = {split_mean:.3} (100 +- 30%), all +4 <r_total> = {unanimous_mean:.4} (2.02 +- 30%)"
        ),
        started,
    );
}

fn split_phase(rep: &mut Report) {
    let started = Instant::now();
    let split = scenario("split-10-10");
    let strong = ensemble(200, 0x4a, |s| params_for(&split, 0.25, 0.2, 0.01, s));
    let f = fraction(&strong, |t| belief_at(t, 100));
    rep.check(
        "4a",
        "split-10-10 at (a0=0.25, b=0.2)",
        f >= 0.9,
        format!("{:.1}% belief at j=100 (>= 90%)", 100.0 * f),
        started,
    );

    let started = Instant::now();
    let weak = ensemble(200, 0x4b, |s| params_for(&split, 0.02, 1.1, 0.01, s));
    let f = fraction(&weak, |t| belief_at(t, 100));
    let null = ensemble(200, 0x4c, |s| params_for(&split, 0.0, 1.1, 0.01, s));
    let f0 = fraction(&null, |t| belief_at(t, 100));
    rep.check(
        "4b",
        "split-10-10 at (a0=0.02, b=1.1)",
        f <= 0.3,
        format!(
            "{:.1}% belief at j=100 (<= 30%); with a0=0 the same setup gives {:.1}%",
            100.0 * f,
            100.0 * f0
        ),
        started,
    );
}

fn contrarian(rep: &mut Report) {
    let c1 = scenario("contrarian-1");
    let started = Instant::now();
    let low = ensemble(200, 0x5a, |s| params_for(&c1, 0.2, 0.2, 0.01, s));
    let f = fraction(&low, |t| reaches_positive_by(t, 1000));
    rep.check(
        "5a",
        "contrarian-1 at (a0=0.2, b=0.2)",
        f >= 0.8,
        format!("{:.1}% reach <d> > 0 by j=1000 (>= 80%)", 100.0 * f),
        started,
    );

    let started = Instant::now();
    let high = ensemble(200, 0x5b, |s| params_for(&c1, 0.2, 1.0, 0.01, s));
    let f = fraction(&high, |t| reaches_positive_by(t, 1000));
    rep.check(
        "5b",
        "contrarian-1 at (a0=0.2, b=1.0)",
        f <= 0.2,
        format!("{:.1}% reach <d> > 0 by j=1000 (<= 20%)", 100.0 * f),
        started,
    );
}

fn frozen_disbelief(rep: &mut Report) {
    let started = Instant::now();
    let neg = scenario("unanimous-neg");
    let mut pick = SimRng::seed_from_u64(MASTER_SEED + 6);
    let pairs: Vec<(f64, f64)> = (0..100)
        .map(|_| (pick.next_open01() * 0.5, pick.next_open01() * 3.0))
        .collect();
    let runs: Vec<Trajectory> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(a0, b))| run(&params_for(&neg, a0, b, 0.0, child_seed(MASTER_SEED ^ 0x6, i as u64))).unwrap())
        .collect();
    let exceptions = runs
        .iter()
        .filter(|t| {
            t.records
                .iter()
                .any(|r| r.beliefs_after.iter().any(|&d| d != BeliefLevel::MIN))
                || t.final_mean_belief().value() != -4.0
        })
        .count();
    let steps: usize = runs.iter().map(|t| t.records.len()).sum();
    rep.check(
        "6",
        "unanimous-neg without mutation",
        exceptions == 0,
        format!("100 runs, {steps} questions, {exceptions} with <d> != -4 (expected 0)"),
        started,
    );
}

fn recovery(rep: &mut Report) {
    let started = Instant::now();
    let neg = scenario("unanimous-neg");
    let runs = ensemble(100, 0x7, |s| params_for(&neg, 0.25, 0.2, 0.01, s));
    let f = fraction(&runs, |t| reaches_positive_by(t, 1000));
    rep.check(
        "7",
        "unanimous-neg recovery at (a0=0.25, b=0.2)",
        f >= 0.6,
        format!("{:.1}% reach <d> > 0 by j=1000 (>= 60%)", 100.0 * f),
        started,
    );
}

fn determinism(rep: &mut Report) {
    let started = Instant::now();
    let p = params_for(&scenario("contrarian-1"), 0.2, 0.3, 0.01, MASTER_SEED + 8);
    let bytes = |t: &Trajectory| {
        let mut buf = Vec::new();
        write_trajectory(t, &mut buf).unwrap();
        buf
    };
    let trajectories_match = bytes(&run(&p).unwrap()) == bytes(&run(&p).unwrap());

    let mut spec = SweepSpec::new(
        SimulationParams::default(),
        scenario("split-10-10"),
        Sampling::Random { count: 96, a0_range: [0.0, 0.3], b_range: [0.0, 1.2] },
    );
    spec.master_seed = MASTER_SEED + 8;
    let dataset = |workers: usize| {
        let points = run_sweep(&spec, workers).unwrap();
        let mut buf = Vec::new();
        write_phase_dataset(&points, &spec.checkpoints, &mut buf).unwrap();
        buf
    };
    let one = dataset(1);
    let sweeps_match = one == dataset(8);
    rep.check(
        "8",
        "determinism and schedule independence",
        trajectories_match && sweeps_match,
        format!(
            "trajectory reruns identical: {trajectories_match}, 96-sample dataset 1 vs 8 workers identical: {sweeps_match} ({} bytes)",
            one.len()
        ),
        started,
    );
}

fn resolution_frequency(rep: &mut Report) {
    let started = Instant::now();
    let mut rng = SimRng::seed_from_u64(MASTER_SEED + 9);
    let mean_s_hat = 0.8;
    let n = 100_000;
    let mut worst_z = 0.0f64;
    for b in [0.1, 0.3, 0.6, 1.0, 2.0] {
        let policy = BiasPolicy { bias: b, ..BiasPolicy::default() };
        for s_hat in [0.02, 0.2, 0.7, 1.5, 3.0] {
            let p = policy.agreement_probability(s_hat, mean_s_hat);
            let agree = (0..n)
                .filter(|_| {
                    reward_sim::agents::resolve_outcome(s_hat, mean_s_hat, Outcome::Yes, &policy, rng.next_open01())
                        == Resolution::Yes
                })
                .count();
            let se = (p * (1.0 - p) / n as f64).sqrt();
            worst_z = worst_z.max((agree as f64 / n as f64 - p).abs() / se);
        }
    }
    rep.check(
        "9",
        "resolution-model frequency",
        worst_z <= 3.0,
        format!("5x5 (b, s_hat) grid, 100000 draws each, max |z| = {worst_z:.2} (<= 3)"),
        started,
    );
}

fn main() -> ExitCode {
    let mut rep = Report { failures: 0 };
    reward_identity(&mut rep);
    forecast_calibration(&mut rep);
    calibration_constants(&mut rep);
    split_phase(&mut rep);
    contrarian(&mut rep);
    frozen_disbelief(&mut rep);
    recovery(&mut rep);
    determinism(&mut rep);
    resolution_frequency(&mut rep);
    if rep.failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criterion line(s) failed", rep.failures);
        ExitCode::FAILURE
    }
}
