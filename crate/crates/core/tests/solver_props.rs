use proptest::prelude::*;

use uavqa::qubo::QuboModel;
use uavqa::solvers::{
    is_local_minimum, Decomposing, Exhaustive, SaSchedule, Sampler, SimulatedAnnealing, SteepestDescent,
};

fn arb_model(max_n: usize) -> impl Strategy<Value = QuboModel> {
    (2..=max_n)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(-20.0..20.0f64, n),
                prop::collection::vec(prop::option::weighted(0.3, -20.0..20.0f64), n * (n - 1) / 2),
            )
        })
        .prop_map(|(n, lin, quad)| {
            let mut q = QuboModel::new(n);
            for (i, c) in lin.into_iter().enumerate() {
                q.add_linear(i, c);
            }
            let mut it = quad.into_iter();
            for i in 0..n {
                for j in i + 1..n {
                    if let Some(c) = it.next().unwrap() {
                        q.add_quadratic(i, j, c);
                    }
                }
            }
            q
        })
}

fn brute_min(q: &QuboModel) -> f64 {
    let n = q.num_vars();
    (0..1u32 << n)
        .map(|code| q.energy(&(0..n).map(|i| code >> i & 1 == 1).collect::<Vec<_>>()).unwrap())
        .fold(f64::INFINITY, f64::min)
}

fn sa(seed: u64, restarts: usize) -> SimulatedAnnealing {
    SimulatedAnnealing::new(SaSchedule { sweeps: 100, restarts, seed, ..Default::default() })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exhaustive_finds_brute_force_minimum(q in arb_model(12)) {
        let e = Exhaustive::default().sample(&q).unwrap().lowest_energy().unwrap();
        prop_assert!((e - brute_min(&q)).abs() <= 1e-9 * e.abs().max(1.0));
    }

    #[test]
    fn no_sampler_beats_exhaustive(q in arb_model(12), seed in any::<u64>()) {
        let floor = Exhaustive::default().sample(&q).unwrap().lowest_energy().unwrap() - 1e-9;
        let sd = SteepestDescent { seed, reads: 4, ..Default::default() };
        for set in [sd.sample(&q).unwrap(), sa(seed, 4).sample(&q).unwrap()] {
            for s in &set.samples {
                prop_assert!(s.energy >= floor);
                prop_assert_eq!(s.energy, q.energy(&s.bits).unwrap());
            }
        }
    }

    #[test]
    fn steepest_descent_stops_in_local_minima(q in arb_model(14), seed in any::<u64>()) {
        let set = SteepestDescent { seed, reads: 3, ..Default::default() }.sample(&q).unwrap();
        for s in &set.samples {
            prop_assert!(is_local_minimum(&q, &s.bits));
        }
    }

    #[test]
    fn more_restarts_never_hurt(q in arb_model(14), seed in any::<u64>()) {
        // Restart r draws from stream r, so a longer run contains the shorter one.
        let few = sa(seed, 3).sample(&q).unwrap().lowest_energy().unwrap();
        let many = sa(seed, 9).sample(&q).unwrap().lowest_energy().unwrap();
        prop_assert!(many <= few);
    }

    #[test]
    fn annealing_is_reproducible(q in arb_model(12), seed in any::<u64>()) {
        let a = sa(seed, 4).sample(&q).unwrap();
        let b = sa(seed, 4).sample(&q).unwrap();
        prop_assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn decomposing_exhaustive_matches_monolithic(q in arb_model(12)) {
        let whole = Exhaustive::default().sample(&q).unwrap().lowest_energy().unwrap();
        let split = Decomposing::new(Exhaustive::default()).sample(&q).unwrap();
        let best = split.best().unwrap();
        prop_assert_eq!(best.bits.len(), q.num_vars());
        prop_assert!((best.energy - whole).abs() <= 1e-9 * whole.abs().max(1.0));
    }
}
