//! Joint sub-channel and power-level selection.
//!
//! Variable `(m * K + k) * L + l` is `X[m,k,l]`: UAV `m` transmits on
//! sub-channel `k` at power level `l`. Given a fixed user association, the
//! aggregate received signal `N(x)` is linear in `x` and the aggregate
//! co-channel interference `I(x)` is quadratic. The ratio
//! `N(x) / (I(x) + noise)` is maximized by a Dinkelbach iteration whose
//! inner problem `min −N(x) + q·I(x) + λ_p2 Σ_m (Σ_{k,l} X[m,k,l] − 1)²` is a
//! QUBO.
//!
//! Powers are expressed in units of the noise power, so the noise term is
//! exactly 1 and the convergence tolerance is relative to an SNR-scale
//! numerator.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::clustering::{enumerate_penalty, BoundMode, ClusterAssignment, PenaltyEstimate, PenaltyMethod};
use crate::clustering::{ENUMERATION_CAP, ESCALATION_FACTOR, ESCALATION_RETRIES, HEURISTIC_MARGIN};
use crate::evaluate::{sum_rate, NetworkAssignment};
use crate::netmodel::{gain_matrix, GainMatrix, Scenario};
use crate::qubo::{penalty_exactly_one, QuboModel, VarLabel};
use crate::solvers::{SampleSet, Sampler};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 20;

/// Flat indexing of `X[m,k,l]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationVars {
    pub num_uavs: usize,
    pub num_subchannels: usize,
    pub num_levels: usize,
}

impl AllocationVars {
    pub fn len(&self) -> usize {
        self.num_uavs * self.num_subchannels * self.num_levels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, uav: usize, subchannel: usize, level: usize) -> usize {
        (uav * self.num_subchannels + subchannel) * self.num_levels + level
    }

    pub fn triple(&self, var: usize) -> (usize, usize, usize) {
        let l = var % self.num_levels;
        let rest = var / self.num_levels;
        (rest / self.num_subchannels, rest % self.num_subchannels, l)
    }

    /// Variables of UAV `uav`, contiguous.
    pub fn group(&self, uav: usize) -> Vec<usize> {
        let w = self.num_subchannels * self.num_levels;
        (uav * w..(uav + 1) * w).collect()
    }

    fn row_count(&self, x: &[bool], uav: usize) -> usize {
        self.group(uav).into_iter().filter(|&v| x[v]).count()
    }
}

/// How many `(k, l)` pairs a UAV may hold in a decoded state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum C9Mode {
    /// Exactly one per UAV.
    #[default]
    Exactly,
    /// At most one; UAVs may stay silent.
    AtMost,
}

impl C9Mode {
    pub fn accepts(&self, vars: &AllocationVars, x: &[bool]) -> bool {
        x.len() == vars.len()
            && (0..vars.num_uavs).all(|m| matches!((self, vars.row_count(x, m)), (_, 1) | (C9Mode::AtMost, 0)))
    }
}

/// Aggregate signal and interference as functions of `x`, in noise units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalObjective {
    pub vars: AllocationVars,
    /// Signal contributed by each variable.
    pub numerator_coeffs: Vec<f64>,
    /// Interference for each co-channel pair `(i, j)`, `i < j`, both directions summed.
    pub denominator_pair_coeffs: BTreeMap<(usize, usize), f64>,
    /// Noise in the same units as the coefficients (always 1).
    pub noise: f64,
    /// Watts per unit.
    pub unit_w: f64,
}

impl FractionalObjective {
    /// `coupling[m][m2]` is the summed gain from UAV `m2` to the GUs of `m`.
    pub fn new(scenario: &Scenario, association: &ClusterAssignment) -> Result<Self> {
        let gains = gain_matrix(scenario)?;
        Self::from_gains(scenario, &gains, association)
    }

    pub fn from_gains(scenario: &Scenario, gains: &GainMatrix, association: &ClusterAssignment) -> Result<Self> {
        let radio = &scenario.radio;
        let m = scenario.num_uavs();
        if !association.is_feasible() || association.num_uavs() != m || association.num_gus() != scenario.num_gus() {
            return Err(Error::InvalidParameter("association must map every GU to one of the UAVs".into()));
        }
        let vars = AllocationVars {
            num_uavs: m,
            num_subchannels: radio.num_subchannels,
            num_levels: radio.num_power_levels(),
        };
        let unit_w = radio.noise_w();
        let power: Vec<f64> = radio.power_levels_w().iter().map(|p| p / unit_w).collect();
        let mut coupling = vec![vec![0.0; m]; m];
        for (n, &server) in association.uav_of_gu().iter().enumerate() {
            for (m2, row) in coupling[server].iter_mut().enumerate() {
                *row += gains.gain(m2, n);
            }
        }
        let mut numerator_coeffs = vec![0.0; vars.len()];
        let mut denominator_pair_coeffs = BTreeMap::new();
        #[allow(clippy::needless_range_loop)]
        for a in 0..m {
            for k in 0..vars.num_subchannels {
                for (l, &p) in power.iter().enumerate() {
                    let i = vars.index(a, k, l);
                    numerator_coeffs[i] = coupling[a][a] * p;
                    for b in a + 1..m {
                        for (l2, &p2) in power.iter().enumerate() {
                            let c = coupling[a][b] * p2 + coupling[b][a] * p;
                            if c != 0.0 {
                                denominator_pair_coeffs.insert((i, vars.index(b, k, l2)), c);
                            }
                        }
                    }
                }
            }
        }
        Ok(Self { vars, numerator_coeffs, denominator_pair_coeffs, noise: 1.0, unit_w })
    }

    pub fn numerator(&self, x: &[bool]) -> f64 {
        self.numerator_coeffs.iter().zip(x).filter(|(_, &b)| b).map(|(c, _)| c).sum()
    }

    pub fn interference(&self, x: &[bool]) -> f64 {
        self.denominator_pair_coeffs.iter().filter(|(&(i, j), _)| x[i] && x[j]).map(|(_, c)| c).sum()
    }

    pub fn denominator(&self, x: &[bool]) -> f64 {
        self.interference(x) + self.noise
    }

    /// `−N(x) + λ_I · I(x)` as a QUBO, without the constraint penalty.
    pub fn cost_qubo(&self, lambda_i: f64) -> QuboModel {
        let mut q = QuboModel::new(self.vars.len());
        for (v, &c) in self.numerator_coeffs.iter().enumerate() {
            let (uav, subchannel, level) = self.vars.triple(v);
            q.set_label(v, VarLabel::Alloc { uav, subchannel, level });
            q.add_linear(v, -c);
        }
        if lambda_i != 0.0 {
            for (&(i, j), &c) in &self.denominator_pair_coeffs {
                q.add_quadratic(i, j, lambda_i * c);
            }
        }
        q
    }

    pub fn qubo(&self, lambda_i: f64, lambda_p2: f64) -> Result<QuboModel> {
        if !(lambda_i >= 0.0 && lambda_i.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda_I must be finite and >= 0, got {lambda_i}")));
        }
        if !(lambda_p2 > 0.0 && lambda_p2.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda_p2 must be finite and > 0, got {lambda_p2}")));
        }
        let groups: Vec<Vec<usize>> = (0..self.vars.num_uavs).map(|m| self.vars.group(m)).collect();
        let penalty = penalty_exactly_one(self.vars.len(), &groups)?;
        self.cost_qubo(lambda_i).scale_and_add(&penalty, lambda_p2)
    }

    /// Heuristic `λ_p2`: the largest cost change a single flip can cause,
    /// plus a margin.
    pub fn heuristic_penalty(&self, lambda_i: f64) -> PenaltyEstimate {
        let adj = self.cost_qubo(lambda_i).adjacency();
        let swing = (0..adj.num_vars())
            .map(|v| adj.linear[v].abs() + adj.neighbors[v].iter().map(|(_, c)| c.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let chosen = if swing > 0.0 { swing * (1.0 + HEURISTIC_MARGIN) } else { 1.0 };
        PenaltyEstimate { lower: swing, upper: chosen.max(swing), chosen, method: PenaltyMethod::HeuristicBound }
    }

    pub fn enumerated_penalty(&self, lambda_i: f64) -> Result<PenaltyEstimate> {
        let n = self.vars.len();
        if n > ENUMERATION_CAP {
            return Err(Error::TooLarge { what: "penalty enumeration", size: n, cap: ENUMERATION_CAP });
        }
        let cost = self.cost_qubo(lambda_i);
        let vars = self.vars;
        enumerate_penalty(n, |code| {
            let x: Vec<bool> = (0..n).map(|i| code >> i & 1 == 1).collect();
            let viol: usize = (0..vars.num_uavs)
                .map(|m| {
                    let c = vars.row_count(&x, m) as i64 - 1;
                    (c * c) as usize
                })
                .sum();
            (cost.energy(&x).expect("length matches"), viol as f64)
        })
    }

    /// Penalty term value `Σ_m (Σ_{k,l} X[m,k,l] − 1)²`.
    pub fn violation(&self, x: &[bool]) -> usize {
        (0..self.vars.num_uavs)
            .map(|m| {
                let c = self.vars.row_count(x, m) as i64 - 1;
                (c * c) as usize
            })
            .sum()
    }
}

pub fn build_allocation_qubo(
    scenario: &Scenario,
    association: &ClusterAssignment,
    lambda_i: f64,
    lambda_p2: f64,
) -> Result<QuboModel> {
    FractionalObjective::new(scenario, association)?.qubo(lambda_i, lambda_p2)
}

pub fn penalty_bound_allocation(
    scenario: &Scenario,
    association: &ClusterAssignment,
    lambda_i: f64,
    mode: BoundMode,
) -> Result<PenaltyEstimate> {
    let obj = FractionalObjective::new(scenario, association)?;
    match mode {
        BoundMode::Heuristic => Ok(obj.heuristic_penalty(lambda_i)),
        BoundMode::Enumerated => obj.enumerated_penalty(lambda_i),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPlan {
    pub subchannel_of_uav: Vec<Option<usize>>,
    pub power_level_of_uav: Vec<Option<usize>>,
    pub power_dbm: Vec<Option<f64>>,
    pub lambda_i: f64,
    pub dinkelbach_iters: usize,
    pub residual_f: f64,
    /// `N(x) / (I(x) + noise)` of the decoded state.
    pub ratio: f64,
    /// Exact sum rate in bits/s/Hz, once evaluated.
    pub sum_rate: Option<f64>,
}

impl AllocationPlan {
    pub fn bits(&self, vars: &AllocationVars) -> Vec<bool> {
        let mut x = vec![false; vars.len()];
        for (m, (k, l)) in self.subchannel_of_uav.iter().zip(&self.power_level_of_uav).enumerate() {
            if let (Some(k), Some(l)) = (k, l) {
                x[vars.index(m, *k, *l)] = true;
            }
        }
        x
    }

    pub fn network_assignment(
        &self,
        association: &ClusterAssignment,
        scenario: &Scenario,
    ) -> Result<NetworkAssignment> {
        NetworkAssignment::from_choices(
            scenario.radio.num_subchannels,
            scenario.radio.num_power_levels(),
            &association.uav_of_gu(),
            &self.subchannel_of_uav,
            &self.power_level_of_uav,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Decodes the lowest-energy sample accepted by `mode`.
pub fn decode_allocation(
    samples: &SampleSet,
    vars: &AllocationVars,
    mode: C9Mode,
    power_levels_dbm: &[f64],
) -> Result<AllocationPlan> {
    let best = samples
        .samples
        .iter()
        .find(|s| mode.accepts(vars, &s.bits))
        .ok_or_else(|| Error::NoFeasible("allocation: no sample satisfies the per-UAV constraint".into()))?;
    Ok(plan_from_bits(&best.bits, vars, power_levels_dbm))
}

fn plan_from_bits(x: &[bool], vars: &AllocationVars, power_levels_dbm: &[f64]) -> AllocationPlan {
    let mut subchannel_of_uav = vec![None; vars.num_uavs];
    let mut power_level_of_uav = vec![None; vars.num_uavs];
    for v in (0..vars.len()).filter(|&v| x[v]) {
        let (m, k, l) = vars.triple(v);
        subchannel_of_uav[m] = Some(k);
        power_level_of_uav[m] = Some(l);
    }
    let power_dbm = power_level_of_uav.iter().map(|l| l.map(|l| power_levels_dbm[l])).collect();
    AllocationPlan {
        subchannel_of_uav,
        power_level_of_uav,
        power_dbm,
        lambda_i: 0.0,
        dinkelbach_iters: 0,
        residual_f: 0.0,
        ratio: 0.0,
        sum_rate: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyPolicy {
    Heuristic,
    Enumerated,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DinkelbachParams {
    pub tol: f64,
    pub max_iter: usize,
    pub penalty: PenaltyPolicy,
    pub c9: C9Mode,
}

impl Default for DinkelbachParams {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, penalty: PenaltyPolicy::Heuristic, c9: C9Mode::Exactly }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DinkelbachStep {
    pub q: f64,
    pub lambda_p2: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// `N(x_t) − q_t · D(x_t)`
    pub f: f64,
    pub best_energy: f64,
}

#[derive(Debug, Clone)]
pub struct AllocationRun {
    pub plan: AllocationPlan,
    pub steps: Vec<DinkelbachStep>,
    pub converged: bool,
    /// Samples of the final iteration.
    pub samples: SampleSet,
    pub objective: FractionalObjective,
    /// Sampler time summed over iterations and penalty retries.
    pub solve_time_s: f64,
}

/// Dinkelbach iteration from `q_0 = 0`: each step samples the QUBO with
/// `λ_I = q_t`, takes the best accepted sample `x_t`, and stops once
/// `|N(x_t) − q_t D(x_t)| ≤ tol · max(1, N(x_t))`; otherwise
/// `q_{t+1} = N(x_t) / D(x_t)`. A step without an accepted sample retries
/// with `λ_p2` scaled by ten, up to three times. The returned plan is the
/// best-ratio state seen.
pub fn dinkelbach_run(
    scenario: &Scenario,
    association: &ClusterAssignment,
    sampler: &dyn Sampler,
    params: &DinkelbachParams,
) -> Result<AllocationRun> {
    if params.tol.is_nan() || params.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", params.tol)));
    }
    if params.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
    }
    let gains = gain_matrix(scenario)?;
    let obj = FractionalObjective::from_gains(scenario, &gains, association)?;
    let vars = obj.vars;
    let mut q = 0.0;
    let mut steps = Vec::new();
    let mut best: Option<(f64, Vec<bool>)> = None;
    let mut solve_time_s = 0.0;
    let mut converged = false;
    let mut last_samples = None;
    for _ in 0..params.max_iter {
        let mut lambda_p2 = match params.penalty {
            PenaltyPolicy::Heuristic => obj.heuristic_penalty(q).chosen,
            PenaltyPolicy::Enumerated => obj.enumerated_penalty(q)?.chosen,
            PenaltyPolicy::Fixed(v) => v,
        };
        let mut accepted = None;
        for _ in 0..=ESCALATION_RETRIES {
            let model = obj.qubo(q, lambda_p2)?;
            let started = Instant::now();
            let mut samples = sampler.sample(&model)?;
            solve_time_s += started.elapsed().as_secs_f64();
            samples.annotate_feasibility(|x| params.c9.accepts(&vars, x));
            let found = samples.samples.iter().find(|s| s.feasible == Some(true)).cloned();
            last_samples = Some(samples);
            if let Some(s) = found {
                accepted = Some(s);
                break;
            }
            lambda_p2 *= ESCALATION_FACTOR;
        }
        let sample = accepted.ok_or_else(|| {
            Error::NoFeasible(format!("allocation: no feasible sample at lambda_I {q:e} after penalty escalation"))
        })?;
        let n = obj.numerator(&sample.bits);
        let d = obj.denominator(&sample.bits);
        let f = n - q * d;
        steps.push(DinkelbachStep { q, lambda_p2, numerator: n, denominator: d, f, best_energy: sample.energy });
        let ratio = n / d;
        if best.as_ref().is_none_or(|(r, _)| ratio > *r) {
            best = Some((ratio, sample.bits.clone()));
        }
        if f.abs() <= params.tol * n.max(1.0) {
            converged = true;
            break;
        }
        if !ratio.is_finite() {
            return Err(Error::NonFinite(format!("Dinkelbach parameter {n} / {d}")));
        }
        q = ratio;
    }
    let (ratio, x) = best.expect("at least one iteration");
    let mut plan = plan_from_bits(&x, &vars, &scenario.radio.power_levels_dbm);
    plan.lambda_i = q;
    plan.dinkelbach_iters = steps.len();
    plan.residual_f = steps.last().map_or(0.0, |s| s.f);
    plan.ratio = ratio;
    let net = plan.network_assignment(association, scenario)?;
    plan.sum_rate = Some(sum_rate(&net, &gains, &scenario.radio.power_levels_w(), scenario.radio.noise_w())?);
    Ok(AllocationRun {
        plan,
        steps,
        converged,
        samples: last_samples.expect("sampled at least once"),
        objective: obj,
        solve_time_s,
    })
}

pub fn dinkelbach_solve(
    scenario: &Scenario,
    association: &ClusterAssignment,
    sampler: &dyn Sampler,
    params: &DinkelbachParams,
) -> Result<AllocationPlan> {
    dinkelbach_run(scenario, association, sampler, params).map(|r| r.plan)
}

/// One entry of the per-link scaling table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerTermScaling {
    pub lambda_num: f64,
    pub lambda_den: f64,
    pub t: f64,
    /// `−g P` when no co-channel interferer is active, else
    /// `−g P + T · λ_num / λ_den`.
    pub cost: f64,
}

/// Per-link scaling factors for state `x`, keyed by `(m, n, k, l)` over the
/// active `X[m,k,l]` and the GUs `n` served by `m`.
///
/// For each such link, every active co-channel interferer `(m', l')` adds
/// `|g[m,n]|² P[l']` to `T` and `|g[m',n]|² P[l']` to `λ_den`, and
/// `λ_num = |g[m,n]|² P[l]`. Powers are in watts.
pub fn per_term_scaling(
    scenario: &Scenario,
    association: &ClusterAssignment,
    x: &[bool],
) -> Result<BTreeMap<(usize, usize, usize, usize), PerTermScaling>> {
    let gains = gain_matrix(scenario)?;
    let vars = AllocationVars {
        num_uavs: scenario.num_uavs(),
        num_subchannels: scenario.radio.num_subchannels,
        num_levels: scenario.radio.num_power_levels(),
    };
    if x.len() != vars.len() {
        return Err(Error::LengthMismatch { expected: vars.len(), actual: x.len() });
    }
    if association.num_uavs() != vars.num_uavs || association.num_gus() != scenario.num_gus() {
        return Err(Error::LengthMismatch {
            expected: vars.num_uavs * scenario.num_gus(),
            actual: association.num_uavs() * association.num_gus(),
        });
    }
    let power = scenario.radio.power_levels_w();
    let mut out = BTreeMap::new();
    for v in (0..vars.len()).filter(|&v| x[v]) {
        let (m, k, l) = vars.triple(v);
        for n in (0..scenario.num_gus()).filter(|&n| association.association[m][n]) {
            let mut t = 0.0;
            let mut lambda_den = 0.0;
            for m2 in (0..vars.num_uavs).filter(|&m2| m2 != m) {
                for (l2, &p2) in power.iter().enumerate() {
                    if x[vars.index(m2, k, l2)] {
                        t += gains.gain(m, n) * p2;
                        lambda_den += gains.gain(m2, n) * p2;
                    }
                }
            }
            let lambda_num = gains.gain(m, n) * power[l];
            let cost = if lambda_den == 0.0 { -lambda_num } else { -lambda_num + t * lambda_num / lambda_den };
            out.insert((m, n, k, l), PerTermScaling { lambda_num, lambda_den, t, cost });
        }
    }
    Ok(out)
}

/// Sum of `ln(1 + γ)` and of `γ` over the links of a plan, in that order.
pub fn linearization_pair(net: &NetworkAssignment, gains: &GainMatrix, scenario: &Scenario) -> Result<(f64, f64)> {
    let reports =
        crate::evaluate::link_reports(net, gains, &scenario.radio.power_levels_w(), scenario.radio.noise_w())?;
    Ok(reports.iter().fold((0.0, 0.0), |(a, b), r| (a + r.sinr.ln_1p(), b + r.sinr)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Point, RadioParams};
    use crate::solvers::{Exhaustive, Sampler};

    fn setup(uavs: &[(f64, f64)], gus: &[(f64, f64)], k: usize, levels: &[f64]) -> (Scenario, ClusterAssignment) {
        let p = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| Point::new(x, y)).collect();
        let radio = RadioParams { num_subchannels: k, power_levels_dbm: levels.to_vec(), ..RadioParams::default() };
        let sc = Scenario::new(p(uavs), p(gus), radio).unwrap();
        let a = crate::clustering::nearest_uav_assignment(&sc).unwrap();
        (sc, a)
    }

    #[test]
    fn indexing_round_trip() {
        let v = AllocationVars { num_uavs: 3, num_subchannels: 2, num_levels: 5 };
        for i in 0..v.len() {
            let (m, k, l) = v.triple(i);
            assert_eq!(v.index(m, k, l), i);
        }
        assert_eq!(v.group(1), (10..20).collect::<Vec<_>>());
    }

    #[test]
    fn single_uav_has_no_couplings_and_picks_max_power() {
        let (sc, a) = setup(&[(0.0, 0.0)], &[(100.0, 0.0), (0.0, 300.0)], 2, &[10.0, 20.0, 30.0]);
        assert!(FractionalObjective::new(&sc, &a).unwrap().denominator_pair_coeffs.is_empty());
        // Only the exactly-one penalty couples the six variables.
        let q = build_allocation_qubo(&sc, &a, 5.0, 1e9).unwrap();
        assert_eq!(q.num_interactions(), 15);
        let run = dinkelbach_run(&sc, &a, &Exhaustive::default(), &DinkelbachParams::default()).unwrap();
        assert_eq!(run.plan.power_level_of_uav, vec![Some(2)]);
        assert!(run.plan.dinkelbach_iters <= 2);
        assert!(run.converged);
    }

    #[test]
    fn co_channel_pair_couples_only_shared_channel() {
        let (sc, a) = setup(&[(0.0, 0.0), (600.0, 0.0)], &[(50.0, 0.0), (550.0, 0.0)], 2, &[20.0]);
        let obj = FractionalObjective::new(&sc, &a).unwrap();
        let keys: Vec<_> = obj.denominator_pair_coeffs.keys().copied().collect();
        assert_eq!(keys, vec![(0, 2), (1, 3)]);
        let mut x = vec![false; 4];
        x[0] = true;
        x[2] = true;
        assert!(obj.interference(&x) > 0.0);
        x[2] = false;
        x[3] = true;
        assert_eq!(obj.interference(&x), 0.0);
    }

    #[test]
    fn strong_interference_weight_separates_channels() {
        let (sc, a) = setup(&[(0.0, 0.0), (600.0, 0.0)], &[(50.0, 0.0), (550.0, 0.0)], 2, &[20.0]);
        let obj = FractionalObjective::new(&sc, &a).unwrap();
        let lam_i = 1e6;
        let pen = obj.heuristic_penalty(lam_i).chosen;
        let s = Exhaustive::default().sample(&obj.qubo(lam_i, pen).unwrap()).unwrap();
        let plan = decode_allocation(&s, &obj.vars, C9Mode::Exactly, &sc.radio.power_levels_dbm).unwrap();
        assert_ne!(plan.subchannel_of_uav[0], plan.subchannel_of_uav[1]);
    }

    #[test]
    fn all_ones_violation_matches_cap() {
        let (sc, a) = setup(&[(0.0, 0.0), (600.0, 0.0), (0.0, 600.0)], &[(50.0, 0.0)], 2, &[10.0, 20.0]);
        let obj = FractionalObjective::new(&sc, &a).unwrap();
        let x = vec![true; obj.vars.len()];
        assert_eq!(obj.violation(&x), 3 * 3 * 3);
    }

    #[test]
    fn per_term_empty_for_zero_state() {
        let (sc, a) = setup(&[(0.0, 0.0), (600.0, 0.0)], &[(50.0, 0.0)], 2, &[20.0]);
        assert!(per_term_scaling(&sc, &a, &[false; 4]).unwrap().is_empty());
    }

    #[test]
    fn decode_rejects_infeasible_only() {
        let vars = AllocationVars { num_uavs: 1, num_subchannels: 1, num_levels: 2 };
        let mut q = QuboModel::new(2);
        q.add_linear(0, -1.0);
        q.add_linear(1, -1.0);
        let s = SampleSet::from_states(&q, vec![vec![true, true]], "fixture").unwrap();
        assert!(matches!(decode_allocation(&s, &vars, C9Mode::Exactly, &[0.0, 1.0]), Err(Error::NoFeasible(_))));
    }
}
