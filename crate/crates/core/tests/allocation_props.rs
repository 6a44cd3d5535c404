mod common;

use proptest::prelude::*;

use uavqa::allocation::{
    decode_allocation, dinkelbach_run, linearization_pair, C9Mode, DinkelbachParams, FractionalObjective,
};
use uavqa::clustering::nearest_uav_assignment;
use uavqa::evaluate::NetworkAssignment;
use uavqa::netmodel::{gain_matrix, Scenario};
use uavqa::solvers::{Exhaustive, SampleSet, Sampler};

/// (scenario, K, L) with M·K·L ≤ 12.
fn small() -> impl Strategy<Value = Scenario> {
    (2usize..=3, 1usize..=2, 1usize..=3)
        .prop_filter("at most 12 variables", |(m, k, l)| m * k * l <= 12)
        .prop_flat_map(|(m, k, l)| (Just((m, k, l)), m..=8))
        .prop_flat_map(|((m, k, l), n)| common::scenario(m, n, k, l, 1500.0))
}

/// Signal and interference of a plan, straight from the gain matrix in noise units.
fn direct_ratio(sc: &Scenario, pick: &[(usize, usize)]) -> (f64, f64) {
    let g = gain_matrix(sc).unwrap();
    let p = sc.radio.power_levels_w();
    let noise = sc.radio.noise_w();
    let serving = nearest_uav_assignment(sc).unwrap().uav_of_gu();
    let (mut s, mut i) = (0.0, 0.0);
    for (gu, &u) in serving.iter().enumerate() {
        s += g.gain(u, gu) * p[pick[u].1] / noise;
        for (v, &(kv, lv)) in pick.iter().enumerate() {
            if v != u && kv == pick[u].0 {
                i += g.gain(v, gu) * p[lv] / noise;
            }
        }
    }
    (s, i)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn feasible_energy_identity(sc in small(), q in 0.0..50.0f64, lp in 1.0..1e4f64) {
        let a = nearest_uav_assignment(&sc).unwrap();
        let obj = FractionalObjective::new(&sc, &a).unwrap();
        let v = obj.vars;
        let model = obj.qubo(q, lp).unwrap();
        for pick in common::choices(v.num_uavs, v.num_subchannels, v.num_levels) {
            let mut x = vec![false; v.len()];
            for (m, &(k, l)) in pick.iter().enumerate() {
                x[v.index(m, k, l)] = true;
            }
            let (s, i) = direct_ratio(&sc, &pick);
            prop_assert!((obj.numerator(&x) - s).abs() <= 1e-9 * s.max(1.0));
            prop_assert!((obj.interference(&x) - i).abs() <= 1e-9 * i.max(1.0));
            let e = model.energy(&x).unwrap();
            let expect = -s + q * i;
            prop_assert!((e - expect).abs() <= 1e-8 * expect.abs().max(s).max(1.0));
        }
    }

    #[test]
    fn heuristic_penalty_makes_ground_state_feasible(sc in small(), q in 0.0..50.0f64) {
        let a = nearest_uav_assignment(&sc).unwrap();
        let obj = FractionalObjective::new(&sc, &a).unwrap();
        for lp in [obj.heuristic_penalty(q).chosen, obj.enumerated_penalty(q).unwrap().chosen] {
            let model = obj.qubo(q, lp).unwrap();
            let ground = Exhaustive::default().sample(&model).unwrap();
            let best = ground.best().unwrap();
            prop_assert!(C9Mode::Exactly.accepts(&obj.vars, &best.bits));
            prop_assert_eq!(obj.violation(&best.bits), 0);
        }
    }

    #[test]
    fn dinkelbach_parameter_never_decreases(sc in small()) {
        let a = nearest_uav_assignment(&sc).unwrap();
        let run = dinkelbach_run(&sc, &a, &Exhaustive::default(), &DinkelbachParams::default()).unwrap();
        prop_assert!(run.converged);
        for w in run.steps.windows(2) {
            prop_assert!(w[1].q >= w[0].q * (1.0 - 1e-12));
        }
        // F(q) is the optimum of N − qD, so it is non-negative at every exact step.
        for s in &run.steps {
            prop_assert!(s.f >= -1e-9 * s.numerator.max(1.0));
        }
        let best = common::choices(a.num_uavs(), sc.radio.num_subchannels, sc.radio.num_power_levels())
            .map(|pick| {
                let (s, i) = direct_ratio(&sc, &pick);
                s / (i + 1.0)
            })
            .fold(0.0, f64::max);
        prop_assert!((run.plan.ratio - best).abs() <= 1e-9 * best);
    }

    #[test]
    fn plan_bits_round_trip(sc in small(), pick in prop::collection::vec((0usize..2, 0usize..3), 3)) {
        let a = nearest_uav_assignment(&sc).unwrap();
        let obj = FractionalObjective::new(&sc, &a).unwrap();
        let v = obj.vars;
        let mut x = vec![false; v.len()];
        for (m, &(k, l)) in pick.iter().take(v.num_uavs).enumerate() {
            x[v.index(m, k % v.num_subchannels, l % v.num_levels)] = true;
        }
        let model = obj.qubo(0.0, 1.0).unwrap();
        let set = SampleSet::from_states(&model, vec![x.clone()], "fixed").unwrap();
        let plan = decode_allocation(&set, &v, C9Mode::Exactly, &sc.radio.power_levels_dbm).unwrap();
        prop_assert_eq!(plan.bits(&v), x);
    }

    #[test]
    fn log_rate_never_exceeds_linear_sinr(
        sc in (1usize..=5, 1usize..=20).prop_flat_map(|(m, n)| common::scenario(m, n, 2, 5, 2500.0)),
        picks in prop::collection::vec((any::<prop::sample::Index>(), 0usize..2, 0usize..5), 20),
    ) {
        let (m, n) = (sc.num_uavs(), sc.num_gus());
        let g = gain_matrix(&sc).unwrap();
        let uav_of_gu: Vec<usize> = picks.iter().take(n).map(|p| p.0.index(m)).collect();
        let ch: Vec<Option<usize>> = picks.iter().take(m).map(|p| Some(p.1)).collect();
        let lv: Vec<Option<usize>> = picks.iter().take(m).map(|p| Some(p.2)).collect();
        let net = NetworkAssignment::from_choices(2, 5, &uav_of_gu, &ch, &lv).unwrap();
        let (log_sum, lin_sum) = linearization_pair(&net, &g, &sc).unwrap();
        prop_assert!(log_sum <= lin_sum);
    }
}
