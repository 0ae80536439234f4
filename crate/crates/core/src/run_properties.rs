//! Whole-run properties over random parameters and seeds.

use proptest::prelude::*;
use crate::io::{read_trajectory, write_trajectory};
use crate::{run, BeliefLevel, SimulationParams};

fn params() -> impl Strategy<Value = SimulationParams> {
    (
        prop::collection::vec(-4i8..=4, 2..12),
        0.0f64..0.6,
        0.0f64..2.0,
        0.0f64..0.05,
        0.0f64..2.0,
        1usize..6,
        any::<u64>(),
    )
        .prop_map(|(beliefs, a0, b, mu, c, n_stable, seed)| {
            let mut p = SimulationParams::default()
                .with_beliefs(beliefs.into_iter().map(|d| BeliefLevel::new(d).unwrap()).collect());
            p.update_policy.base_affinity = a0;
            p.update_policy.mutation_rate = mu;
            p.bias_policy.bias = b;
            p.breadth_constant = c;
            p.n_stable = n_stable;
            p.n_max = 120;
            p.checkpoints = vec![1, 10, 50, 100];
            p.seed = seed;
            p
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn runs_satisfy_bookkeeping_invariants(p in params()) {
        let t = run(&p).unwrap();
        t.check_invariants().unwrap();
        prop_assert_eq!(t.records.len(), t.halt_step);
        for r in &t.records {
            prop_assert!(r.beliefs_after.iter().all(|d| d.value().abs() <= 4));
            prop_assert!(r.forecasts.iter().all(|&f| (0.01..=0.99).contains(&f)));
            let expected = r
                .stats
                .as_ref()
                .map_or(0.0, |s| s.breadth_constant * p.n_experts as f64 * s.std_dev * s.std_dev * r.consensus.consensus);
            prop_assert!((r.total_reward - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
        }
    }

    #[test]
    fn same_seed_same_bytes(p in params()) {
        let write = |p: &SimulationParams| {
            let mut buf = Vec::new();
            write_trajectory(&run(p).unwrap(), &mut buf).unwrap();
            buf
        };
        let first = write(&p);
        prop_assert_eq!(&first, &write(&p));
        let (meta, rows) = read_trajectory(first.as_slice()).unwrap();
        prop_assert_eq!(meta.seed, p.seed);
        prop_assert_eq!(rows.len(), meta.halt_step);
    }

    #[test]
    fn frozen_unanimity_without_mutation(a0 in 0.0f64..1.0, b in 0.0f64..3.0, seed in any::<u64>()) {
        let mut p = SimulationParams::default().with_beliefs(vec![BeliefLevel::MIN; 20]);
        p.update_policy.base_affinity = a0;
        p.update_policy.mutation_rate = 0.0;
        p.bias_policy.bias = b;
        p.seed = seed;
        let t = run(&p).unwrap();
        prop_assert!(t.records.iter().all(|r| r.beliefs_after.iter().all(|&d| d == BeliefLevel::MIN)));
    }
}
