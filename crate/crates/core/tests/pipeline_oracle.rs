//! Two-stage pipeline against brute force on both stages (M=3, K=2, L=2, N=9).

mod common;

use proptest::prelude::*;

use uavqa::allocation::dinkelbach_run;
use uavqa::clustering::{nearest_uav_assignment, ClusterAssignment};
use uavqa::experiments::{pipeline, stage_solvers, SolverKind, SolverParams};
use uavqa::netmodel::{gain_matrix, Scenario};

fn brute_cluster(sc: &Scenario) -> f64 {
    let (m, n) = (sc.num_uavs(), sc.num_gus());
    let d = sc.distances();
    (0..m.pow(n as u32))
        .map(|code| (0..n).map(|g| d[code / m.pow(g as u32) % m][g]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn brute_ratio(sc: &Scenario, a: &ClusterAssignment) -> f64 {
    let g = gain_matrix(sc).unwrap();
    let p = sc.radio.power_levels_w();
    let noise = sc.radio.noise_w();
    let serving = a.uav_of_gu();
    common::choices(sc.num_uavs(), sc.radio.num_subchannels, p.len())
        .map(|pick| {
            let (mut s, mut i) = (0.0, 0.0);
            for (gu, &u) in serving.iter().enumerate() {
                s += g.gain(u, gu) * p[pick[u].1];
                for (v, &(kv, lv)) in pick.iter().enumerate() {
                    if v != u && kv == pick[u].0 {
                        i += g.gain(v, gu) * p[lv];
                    }
                }
            }
            s / (i + noise)
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn exhaustive_pipeline_matches_brute_force(sc in common::scenario(3, 9, 2, 2, 2000.0)) {
        let params = SolverParams::default();
        let (cs, alloc) = stage_solvers(SolverKind::Exhaustive, &params, 0);
        let out = pipeline(&sc, &cs, alloc.as_ref(), None, &params.dinkelbach()).unwrap();
        let best_cluster = brute_cluster(&sc);
        prop_assert!((out.cluster.assignment.objective - best_cluster).abs() <= 1e-9 * best_cluster);
        let best_ratio = brute_ratio(&sc, &out.cluster.assignment);
        prop_assert!((out.allocation.plan.ratio - best_ratio).abs() <= 1e-9 * best_ratio);
        prop_assert!(out.sum_rate > 0.0);
    }

    #[test]
    fn annealing_pipeline_reaches_the_same_ratio(sc in common::scenario(3, 9, 2, 2, 2000.0), seed in any::<u64>()) {
        let params = SolverParams::default();
        let (cs, alloc) = stage_solvers(SolverKind::Qa, &params, seed);
        let out = pipeline(&sc, &cs, alloc.as_ref(), None, &params.dinkelbach()).unwrap();
        let best_ratio = brute_ratio(&sc, &out.cluster.assignment);
        prop_assert!((out.allocation.plan.ratio - best_ratio).abs() <= 1e-9 * best_ratio);
    }

    #[test]
    fn exhaustive_ratio_dominates_descent_on_the_same_association(
        sc in (2usize..=4, 4usize..=30).prop_flat_map(|(m, n)| common::scenario(m, n, 2, if m >= 3 { 3 } else { 5 }, 2500.0)),
        seed in any::<u64>(),
    ) {
        // The ratio, not the sum rate: the surrogate can rank plans differently from the exact rate.
        let params = SolverParams::default();
        let a = nearest_uav_assignment(&sc).unwrap();
        let (_, ex) = stage_solvers(SolverKind::Exhaustive, &params, seed);
        let (_, sd) = stage_solvers(SolverKind::Sd, &params, seed);
        let best = dinkelbach_run(&sc, &a, ex.as_ref(), &params.dinkelbach()).unwrap().plan.ratio;
        let local = dinkelbach_run(&sc, &a, sd.as_ref(), &params.dinkelbach()).unwrap().plan.ratio;
        prop_assert!(best >= local * (1.0 - 1e-12));
    }
}
