//! Distance-based user clustering as a QUBO, its penalty factor, and the
//! K-means++ baseline.
//!
//! Variable `m * N + n` is `X[m,n]`, set when GU `n` is served by UAV `m`.
//! The QUBO is `Σ X[m,n] d[m,n] + λ_p Σ_n (Σ_m X[m,n] − 1)²`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::netmodel::{Point, Scenario};
use crate::qubo::{penalty_exactly_one, QuboModel, VarLabel};
use crate::solvers::{SampleSet, Sampler};
use crate::{Error, Result};

/// Cap on `M * N` (or `M * K * L`) for exhaustive penalty bounds.
pub const ENUMERATION_CAP: usize = 20;

/// Retries of the sample/escalate loop after the first attempt.
pub const ESCALATION_RETRIES: usize = 3;
pub const ESCALATION_FACTOR: f64 = 10.0;

/// Relative margin added on top of the heuristic penalty bounds.
pub const HEURISTIC_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// `[uav][gu]`
    pub association: Vec<Vec<bool>>,
    /// `Σ X[m,n] d[m,n]` in metres.
    pub objective: f64,
    pub source: String,
}

impl ClusterAssignment {
    /// Builds the assignment from a GU→UAV map and the distance matrix.
    pub fn from_uav_of_gu(distances: &[Vec<f64>], uav_of_gu: &[usize], source: &str) -> Result<Self> {
        let m = distances.len();
        let mut association = vec![vec![false; uav_of_gu.len()]; m];
        let mut objective = 0.0;
        for (n, &u) in uav_of_gu.iter().enumerate() {
            if u >= m {
                return Err(Error::InvalidParameter(format!("GU {n} mapped to UAV {u} of {m}")));
            }
            association[u][n] = true;
            objective += distances[u][n];
        }
        Ok(Self { association, objective, source: source.to_string() })
    }

    pub fn num_uavs(&self) -> usize {
        self.association.len()
    }

    pub fn num_gus(&self) -> usize {
        self.association.first().map_or(0, Vec::len)
    }

    /// Serving UAV of every GU; panics if a column is not one-hot.
    pub fn uav_of_gu(&self) -> Vec<usize> {
        (0..self.num_gus())
            .map(|n| (0..self.num_uavs()).find(|&m| self.association[m][n]).expect("every GU is associated"))
            .collect()
    }

    pub fn is_feasible(&self) -> bool {
        (0..self.num_gus()).all(|n| self.association.iter().filter(|row| row[n]).count() == 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyMethod {
    Enumerated,
    HeuristicBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyEstimate {
    pub lower: f64,
    pub upper: f64,
    pub chosen: f64,
    pub method: PenaltyMethod,
}

/// Enumerates all `2^n` states, where `eval(code)` returns the cost and the
/// constraint violation (zero on the feasible set), and brackets the penalty
/// factor: `lower` is the largest `(H* − H(x)) / V(x)` over infeasible `x`,
/// `H*` being the feasible optimum, and `upper` the largest infeasible cost.
/// With `floor = max(lower, 0)`, an upper value not clearly above the floor is
/// lifted to `floor + max(|H*|, floor)`. The midpoint of floor and upper is
/// chosen.
pub(crate) fn enumerate_penalty(n: usize, eval: impl Fn(u64) -> (f64, f64)) -> Result<PenaltyEstimate> {
    if n > ENUMERATION_CAP {
        return Err(Error::TooLarge { what: "penalty enumeration", size: n, cap: ENUMERATION_CAP });
    }
    let total = 1u64 << n;
    let best = (0..total).map(&eval).filter(|&(_, v)| v == 0.0).map(|(c, _)| c).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::NoFeasible("no feasible state to bound the penalty against".into()));
    }
    let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for code in 0..total {
        let (c, v) = eval(code);
        if v > 0.0 {
            lower = lower.max((best - c) / v);
            upper = upper.max(c);
        }
    }
    let floor = lower.max(0.0);
    // An upper value within rounding of the floor leaves no usable interval.
    if upper <= floor + 1e-9 * floor.max(1.0) {
        let gap = best.abs().max(floor);
        upper = floor + if gap > 0.0 { gap } else { 1.0 };
    }
    Ok(PenaltyEstimate { lower, upper, chosen: 0.5 * (floor + upper), method: PenaltyMethod::Enumerated })
}

fn check_lambda(lambda: f64, name: &str) -> Result<()> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite(name.into()));
    }
    if lambda <= 0.0 {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {lambda}")));
    }
    Ok(())
}

pub fn var_index(num_gus: usize, uav: usize, gu: usize) -> usize {
    uav * num_gus + gu
}

/// Exactly-one penalty groups, one per GU.
fn gu_groups(m: usize, n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|g| (0..m).map(|u| var_index(n, u, g)).collect()).collect()
}

pub fn build_clustering_qubo(scenario: &Scenario, lambda_p: f64) -> Result<QuboModel> {
    check_lambda(lambda_p, "lambda_p")?;
    build_from_distances(&scenario.distances(), lambda_p)
}

pub(crate) fn build_from_distances(distances: &[Vec<f64>], lambda_p: f64) -> Result<QuboModel> {
    let m = distances.len();
    let n = distances.first().map_or(0, Vec::len);
    let mut cost = QuboModel::new(m * n);
    for (u, row) in distances.iter().enumerate() {
        for (g, &d) in row.iter().enumerate() {
            let v = var_index(n, u, g);
            cost.set_label(v, VarLabel::Assoc { uav: u, gu: g });
            cost.add_linear(v, d);
        }
    }
    let penalty = penalty_exactly_one(m * n, &gu_groups(m, n))?;
    cost.scale_and_add(&penalty, lambda_p)
}

/// True when every GU has exactly one serving UAV.
pub fn is_feasible_bits(bits: &[bool], num_uavs: usize, num_gus: usize) -> bool {
    bits.len() == num_uavs * num_gus
        && (0..num_gus).all(|g| (0..num_uavs).filter(|&u| bits[var_index(num_gus, u, g)]).count() == 1)
}

pub fn decode_bits(bits: &[bool], distances: &[Vec<f64>], source: &str) -> Result<ClusterAssignment> {
    let m = distances.len();
    let n = distances.first().map_or(0, Vec::len);
    if !is_feasible_bits(bits, m, n) {
        return Err(Error::InvalidParameter("state violates the one-UAV-per-GU constraint".into()));
    }
    let uav_of_gu: Vec<usize> = (0..n).map(|g| (0..m).find(|&u| bits[var_index(n, u, g)]).expect("feasible")).collect();
    ClusterAssignment::from_uav_of_gu(distances, &uav_of_gu, source)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    Enumerated,
    Heuristic,
}

/// Penalty factor for the clustering QUBO.
///
/// The heuristic value `max d · (1 + margin)` makes removing a GU from every
/// UAV, or adding a second UAV, always cost more than any single distance.
pub fn penalty_bound_clustering(scenario: &Scenario, mode: BoundMode) -> Result<PenaltyEstimate> {
    let d = scenario.distances();
    let m = d.len();
    let n = scenario.num_gus();
    match mode {
        BoundMode::Heuristic => {
            let max_d = d.iter().flatten().copied().fold(0.0, f64::max);
            let total: f64 = d.iter().flatten().sum();
            Ok(PenaltyEstimate {
                lower: max_d,
                upper: total.max(max_d),
                chosen: max_d * (1.0 + HEURISTIC_MARGIN),
                method: PenaltyMethod::HeuristicBound,
            })
        }
        BoundMode::Enumerated => {
            if m * n > ENUMERATION_CAP {
                return Err(Error::TooLarge { what: "penalty enumeration", size: m * n, cap: ENUMERATION_CAP });
            }
            enumerate_penalty(m * n, |code| {
                let mut cost = 0.0;
                let mut viol = 0.0;
                for g in 0..n {
                    let mut count = 0i64;
                    for (u, row) in d.iter().enumerate() {
                        if code >> var_index(n, u, g) & 1 == 1 {
                            cost += row[g];
                            count += 1;
                        }
                    }
                    viol += ((count - 1) * (count - 1)) as f64;
                }
                (cost, viol)
            })
        }
    }
}

/// One clustering solve with its raw samples.
#[derive(Debug, Clone)]
pub struct ClusterRun {
    pub assignment: ClusterAssignment,
    /// Samples from the attempt that produced the assignment.
    pub samples: SampleSet,
    pub lambda_p: f64,
    pub attempts: usize,
    /// Sampler time summed over attempts; QUBO construction excluded.
    pub solve_time_s: f64,
}

/// Builds the QUBO, samples it and decodes the lowest-energy feasible state,
/// multiplying `λ_p` by ten and retrying (up to three times) when no sample
/// is feasible.
pub fn cluster_run(scenario: &Scenario, sampler: &dyn Sampler, lambda_p: f64) -> Result<ClusterRun> {
    check_lambda(lambda_p, "lambda_p")?;
    let d = scenario.distances();
    let (m, n) = (scenario.num_uavs(), scenario.num_gus());
    let mut lambda = lambda_p;
    let mut solve_time_s = 0.0;
    for attempt in 1..=ESCALATION_RETRIES + 1 {
        let model = build_from_distances(&d, lambda)?;
        let started = Instant::now();
        let mut samples = sampler.sample(&model)?;
        solve_time_s += started.elapsed().as_secs_f64();
        samples.annotate_feasibility(|x| is_feasible_bits(x, m, n));
        if let Some(best) = samples.samples.iter().find(|s| s.feasible == Some(true)) {
            let assignment = decode_bits(&best.bits, &d, &samples.solver_name)?;
            return Ok(ClusterRun { assignment, samples, lambda_p: lambda, attempts: attempt, solve_time_s });
        }
        lambda *= ESCALATION_FACTOR;
    }
    Err(Error::NoFeasible(format!(
        "clustering: no feasible sample after {} attempts (last lambda_p {lambda:e})",
        ESCALATION_RETRIES + 1
    )))
}

pub fn cluster(scenario: &Scenario, sampler: &dyn Sampler, lambda_p: f64) -> Result<ClusterAssignment> {
    cluster_run(scenario, sampler, lambda_p).map(|r| r.assignment)
}

/// Every GU on its closest UAV (lowest index among equal distances).
pub fn nearest_uav_assignment(scenario: &Scenario) -> Result<ClusterAssignment> {
    let d = scenario.distances();
    let uav_of_gu: Vec<usize> = (0..scenario.num_gus()).map(|g| nearest(&d, g)).collect();
    ClusterAssignment::from_uav_of_gu(&d, &uav_of_gu, "nearest")
}

fn nearest(d: &[Vec<f64>], gu: usize) -> usize {
    (0..d.len()).min_by(|&a, &b| d[a][gu].total_cmp(&d[b][gu]).then(a.cmp(&b))).expect("at least one UAV")
}

/// Share of GUs whose serving UAV is not at minimum distance. Ties count as
/// well matched.
pub fn poor_matching_fraction(assignment: &ClusterAssignment, scenario: &Scenario) -> Result<f64> {
    if !assignment.is_feasible() {
        return Err(Error::InvalidParameter("assignment is not one UAV per GU".into()));
    }
    let d = scenario.distances();
    if assignment.num_uavs() != d.len() || assignment.num_gus() != scenario.num_gus() {
        return Err(Error::LengthMismatch {
            expected: d.len() * scenario.num_gus(),
            actual: assignment.num_uavs() * assignment.num_gus(),
        });
    }
    let n = scenario.num_gus();
    let poor = assignment.uav_of_gu().iter().enumerate().filter(|&(g, &u)| d[u][g] > d[nearest(&d, g)][g]).count();
    Ok(poor as f64 / n as f64)
}

/// K-means++ on GU positions, then each cluster mapped onto a fixed UAV.
///
/// Seeding uses D² sampling; Lloyd iterations stop when the labels stop
/// changing or after `max_iters`. Clusters are matched to UAVs greedily by
/// centroid–UAV distance, so a cluster whose nearest UAV is taken moves to
/// its next-nearest free UAV.
pub fn kmeanspp(scenario: &Scenario, num_clusters: usize, seed: u64, max_iters: usize) -> Result<ClusterAssignment> {
    let m = scenario.num_uavs();
    if num_clusters != m {
        return Err(Error::InvalidParameter(format!("{num_clusters} clusters for {m} UAVs")));
    }
    let pts = &scenario.gu_positions;
    if m > pts.len() {
        return Err(Error::InvalidParameter(format!("{m} clusters for {} GUs", pts.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(pts, m, &mut rng);
    let mut labels = vec![usize::MAX; pts.len()];
    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        for (i, p) in pts.iter().enumerate() {
            let c = closest(&centroids, p);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![(0.0, 0.0, 0usize); m];
        for (p, &c) in pts.iter().zip(&labels) {
            sums[c].0 += p.x;
            sums[c].1 += p.y;
            sums[c].2 += 1;
        }
        for (c, &(sx, sy, k)) in sums.iter().enumerate() {
            if k > 0 {
                centroids[c] = Point::new(sx / k as f64, sy / k as f64);
            }
        }
    }

    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(m * m);
    for (c, cen) in centroids.iter().enumerate() {
        for (u, uav) in scenario.uav_positions.iter().enumerate() {
            pairs.push((cen.horizontal_distance(uav), c, u));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut uav_of_cluster = vec![usize::MAX; m];
    let mut taken = vec![false; m];
    for (_, c, u) in pairs {
        if uav_of_cluster[c] == usize::MAX && !taken[u] {
            uav_of_cluster[c] = u;
            taken[u] = true;
        }
    }
    let uav_of_gu: Vec<usize> = labels.iter().map(|&c| uav_of_cluster[c]).collect();
    ClusterAssignment::from_uav_of_gu(&scenario.distances(), &uav_of_gu, "kmeans++")
}

fn closest(centroids: &[Point], p: &Point) -> usize {
    (0..centroids.len())
        .min_by(|&a, &b| {
            let da = centroids[a].horizontal_distance(p);
            let db = centroids[b].horizontal_distance(p);
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .expect("at least one centroid")
}

fn seed_centroids(pts: &[Point], k: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut centroids = vec![pts[rng.random_range(0..pts.len())]];
    let mut d2: Vec<f64> = pts.iter().map(|p| p.horizontal_distance(&centroids[0]).powi(2)).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = pts.len() - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            rng.random_range(0..pts.len())
        };
        let c = pts[next];
        for (w, p) in d2.iter_mut().zip(pts) {
            *w = w.min(p.horizontal_distance(&c).powi(2));
        }
        centroids.push(c);
    }
    centroids
}
