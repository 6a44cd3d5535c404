//! Two-stage pipeline, parameter sweeps, the clustering comparison table and
//! plot-ready CSV output.
//!
//! Solver roster entries name a pair of stage solvers:
//!
//! | name         | clustering                         | allocation        |
//! |--------------|------------------------------------|-------------------|
//! | `exhaustive` | per-GU exhaustive enumeration      | exhaustive        |
//! | `sd`         | steepest descent, random start     | steepest descent  |
//! | `sa`         | simulated annealing, whole model   | simulated annealing |
//! | `qa`         | simulated annealing per component  | simulated annealing |
//! | `kmeanspp`   | K-means++ decoded onto the UAVs    | simulated annealing |
//!
//! `qa` is the annealer stand-in: like a hybrid annealing service it splits
//! the problem into independent pieces before sampling each one.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{dinkelbach_run, AllocationRun, DinkelbachParams};
use crate::clustering::{
    cluster_run, kmeanspp, penalty_bound_clustering, poor_matching_fraction, BoundMode, ClusterAssignment,
};
use crate::netmodel::{generate_scenario, Scenario, ScenarioConfig};
use crate::seeds::{scenario_seed, solver_seed};
use crate::solvers::{Decomposing, Exhaustive, SaSchedule, SampleSet, Sampler, SimulatedAnnealing, SteepestDescent};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exhaustive,
    Sd,
    Sa,
    Qa,
    Kmeanspp,
}

impl SolverKind {
    pub const ALL: [SolverKind; 5] =
        [SolverKind::Exhaustive, SolverKind::Sd, SolverKind::Sa, SolverKind::Qa, SolverKind::Kmeanspp];

    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Exhaustive => "exhaustive",
            SolverKind::Sd => "sd",
            SolverKind::Sa => "sa",
            SolverKind::Qa => "qa",
            SolverKind::Kmeanspp => "kmeanspp",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| Error::UnknownKind(format!("solver {s}")))
    }
}

/// Sampler settings shared by every stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub sweeps: usize,
    pub restarts: usize,
    pub beta_initial: Option<f64>,
    pub beta_final: Option<f64>,
    pub sd_reads: usize,
    pub kmeans_max_iters: usize,
    pub exhaustive_cap: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Fixed clustering penalty; the heuristic bound when unset.
    pub lambda_p: Option<f64>,
}

impl Default for SolverParams {
    fn default() -> Self {
        let sa = SaSchedule::default();
        let dk = DinkelbachParams::default();
        Self {
            sweeps: sa.sweeps,
            restarts: sa.restarts,
            beta_initial: sa.beta_initial,
            beta_final: sa.beta_final,
            sd_reads: 1,
            kmeans_max_iters: 100,
            exhaustive_cap: Exhaustive::default().max_vars,
            tol: dk.tol,
            max_iter: dk.max_iter,
            lambda_p: None,
        }
    }
}

impl SolverParams {
    pub fn schedule(&self, seed: u64) -> SaSchedule {
        SaSchedule {
            sweeps: self.sweeps,
            restarts: self.restarts,
            beta_initial: self.beta_initial,
            beta_final: self.beta_final,
            seed,
        }
    }

    pub fn dinkelbach(&self) -> DinkelbachParams {
        DinkelbachParams { tol: self.tol, max_iter: self.max_iter, ..Default::default() }
    }

    fn exhaustive(&self) -> Exhaustive {
        Exhaustive { max_vars: self.exhaustive_cap, ..Default::default() }
    }

    fn sd(&self, seed: u64) -> SteepestDescent {
        SteepestDescent { seed, reads: self.sd_reads, ..Default::default() }
    }
}

/// How the first stage associates GUs with UAVs.
pub enum ClusterSolver {
    Qubo(Box<dyn Sampler>),
    KMeansPP { seed: u64, max_iters: usize },
}

/// Stage solvers for a roster entry, seeded with `seed`.
pub fn stage_solvers(kind: SolverKind, params: &SolverParams, seed: u64) -> (ClusterSolver, Box<dyn Sampler>) {
    let sa = || SimulatedAnnealing::new(params.schedule(seed));
    match kind {
        SolverKind::Exhaustive => {
            (ClusterSolver::Qubo(Box::new(Decomposing::new(params.exhaustive()))), Box::new(params.exhaustive()))
        }
        SolverKind::Sd => (ClusterSolver::Qubo(Box::new(params.sd(seed))), Box::new(params.sd(seed))),
        SolverKind::Sa => (ClusterSolver::Qubo(Box::new(sa())), Box::new(sa())),
        SolverKind::Qa => (ClusterSolver::Qubo(Box::new(Decomposing::new(sa()))), Box::new(sa())),
        SolverKind::Kmeanspp => (ClusterSolver::KMeansPP { seed, max_iters: params.kmeans_max_iters }, Box::new(sa())),
    }
}

#[derive(Debug, Clone)]
pub struct ClusterStageResult {
    pub assignment: ClusterAssignment,
    /// `None` for K-means++.
    pub samples: Option<SampleSet>,
    pub lambda_p: Option<f64>,
    pub time_s: f64,
}

pub fn run_cluster_stage(
    scenario: &Scenario,
    solver: &ClusterSolver,
    lambda_p: Option<f64>,
) -> Result<ClusterStageResult> {
    match solver {
        ClusterSolver::Qubo(sampler) => {
            let lambda = match lambda_p {
                Some(l) => l,
                None => penalty_bound_clustering(scenario, BoundMode::Heuristic)?.chosen,
            };
            let run = cluster_run(scenario, sampler.as_ref(), lambda)?;
            Ok(ClusterStageResult {
                assignment: run.assignment,
                samples: Some(run.samples),
                lambda_p: Some(run.lambda_p),
                time_s: run.solve_time_s,
            })
        }
        ClusterSolver::KMeansPP { seed, max_iters } => {
            let started = Instant::now();
            let assignment = kmeanspp(scenario, scenario.num_uavs(), *seed, *max_iters)?;
            Ok(ClusterStageResult {
                assignment,
                samples: None,
                lambda_p: None,
                time_s: started.elapsed().as_secs_f64(),
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub cluster: ClusterStageResult,
    pub allocation: AllocationRun,
    pub sum_rate: f64,
}

/// Clusters, then allocates sub-channels and power for that clustering.
pub fn pipeline(
    scenario: &Scenario,
    cluster_solver: &ClusterSolver,
    alloc_sampler: &dyn Sampler,
    lambda_p: Option<f64>,
    dinkelbach: &DinkelbachParams,
) -> Result<PipelineOutcome> {
    let cluster = run_cluster_stage(scenario, cluster_solver, lambda_p)?;
    let allocation = dinkelbach_run(scenario, &cluster.assignment, alloc_sampler, dinkelbach)?;
    let sum_rate = allocation.plan.sum_rate.expect("evaluated by the Dinkelbach run");
    Ok(PipelineOutcome { cluster, allocation, sum_rate })
}

/// Cartesian product of the listed values; an empty list keeps the template value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepAxis {
    pub num_uavs: Vec<usize>,
    pub num_gus: Vec<usize>,
    pub num_subchannels: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SweepPoint {
    pub num_uavs: usize,
    pub num_gus: usize,
    pub num_subchannels: usize,
}

impl SweepAxis {
    pub fn points(&self, template: &ScenarioConfig) -> Vec<SweepPoint> {
        let or = |v: &Vec<usize>, d: usize| if v.is_empty() { vec![d] } else { v.clone() };
        let mut out = Vec::new();
        for &k in &or(&self.num_subchannels, template.num_subchannels) {
            for &m in &or(&self.num_uavs, template.num_uavs) {
                for &n in &or(&self.num_gus, template.num_gus) {
                    out.push(SweepPoint { num_uavs: m, num_gus: n, num_subchannels: k });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub axis: SweepAxis,
    pub roster: Vec<SolverKind>,
    /// Master seeds; each splits into a scenario stream and a solver stream.
    pub seeds: Vec<u64>,
    pub solver: SolverParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            axis: SweepAxis::default(),
            roster: vec![SolverKind::Qa, SolverKind::Sd],
            seeds: vec![0],
            solver: SolverParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.roster.is_empty() {
            return Err(Error::InvalidParameter("solver roster is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("seed list is empty".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(s) = self.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(Error::InvalidParameter(format!("seed {s} listed twice")));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Scenario for a sweep point and master seed. GU positions depend only
    /// on the seed, so every point of a sweep sees the same users.
    pub fn scenario_at(&self, point: SweepPoint, seed: u64) -> Result<Scenario> {
        let cfg = ScenarioConfig {
            num_uavs: point.num_uavs,
            num_gus: point.num_gus,
            num_subchannels: point.num_subchannels,
            seed: scenario_seed(seed),
            ..self.scenario.clone()
        };
        generate_scenario(&cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub num_uavs: usize,
    pub num_gus: usize,
    pub num_subchannels: usize,
    pub solver: SolverKind,
    pub seed: u64,
    pub sum_rate: f64,
    pub cluster_objective: f64,
    pub poor_matching_pct: f64,
    pub dinkelbach_iters: usize,
    pub residual_f: f64,
    pub cluster_time_s: f64,
    pub alloc_time_s: f64,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn point(&self) -> SweepPoint {
        SweepPoint { num_uavs: self.num_uavs, num_gus: self.num_gus, num_subchannels: self.num_subchannels }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn wall_time_s(&self) -> f64 {
        self.cluster_time_s + self.alloc_time_s
    }
}

pub fn run_point(config: &ExperimentConfig, point: SweepPoint, solver: SolverKind, seed: u64) -> RunRecord {
    let mut rec = RunRecord {
        num_uavs: point.num_uavs,
        num_gus: point.num_gus,
        num_subchannels: point.num_subchannels,
        solver,
        seed,
        sum_rate: f64::NAN,
        cluster_objective: f64::NAN,
        poor_matching_pct: f64::NAN,
        dinkelbach_iters: 0,
        residual_f: f64::NAN,
        cluster_time_s: 0.0,
        alloc_time_s: 0.0,
        error: None,
    };
    let outcome = config.scenario_at(point, seed).and_then(|scenario| {
        let (cs, alloc) = stage_solvers(solver, &config.solver, solver_seed(seed));
        let out = pipeline(&scenario, &cs, alloc.as_ref(), config.solver.lambda_p, &config.solver.dinkelbach())?;
        let poor = poor_matching_fraction(&out.cluster.assignment, &scenario)?;
        Ok((out, poor))
    });
    match outcome {
        Ok((out, poor)) => {
            rec.sum_rate = out.sum_rate;
            rec.cluster_objective = out.cluster.assignment.objective;
            rec.poor_matching_pct = 100.0 * poor;
            rec.dinkelbach_iters = out.allocation.plan.dinkelbach_iters;
            rec.residual_f = out.allocation.plan.residual_f;
            rec.cluster_time_s = out.cluster.time_s;
            rec.alloc_time_s = out.allocation.solve_time_s;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Runs every point × solver × seed. Failures are recorded, not raised.
pub fn sweep(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let mut tasks = Vec::new();
    for point in config.axis.points(&config.scenario) {
        for &solver in &config.roster {
            for &seed in &config.seeds {
                tasks.push((point, solver, seed));
            }
        }
    }
    Ok(tasks.into_par_iter().map(|(p, s, seed)| run_point(config, p, s, seed)).collect())
}

fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// One row per record. Timing columns are omitted when `timing` is false,
/// leaving output that is byte-identical across runs with equal seeds.
pub fn write_records_csv<W: Write>(records: &[RunRecord], timing: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "num_uavs",
        "num_gus",
        "num_subchannels",
        "solver",
        "seed",
        "sum_rate",
        "cluster_objective",
        "poor_matching_pct",
        "dinkelbach_iters",
        "residual_f",
    ];
    if timing {
        header.extend(["cluster_time_s", "alloc_time_s"]);
    }
    header.push("error");
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.num_uavs.to_string(),
            r.num_gus.to_string(),
            r.num_subchannels.to_string(),
            r.solver.to_string(),
            r.seed.to_string(),
            fmt_f(r.sum_rate),
            fmt_f(r.cluster_objective),
            fmt_f(r.poor_matching_pct),
            r.dinkelbach_iters.to_string(),
            fmt_f(r.residual_f),
        ];
        if timing {
            row.extend([fmt_f(r.cluster_time_s), fmt_f(r.alloc_time_s)]);
        }
        row.push(r.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub point: SweepPoint,
    pub solver: SolverKind,
    pub runs: usize,
    pub failures: usize,
    pub mean_sum_rate: f64,
    pub std_sum_rate: f64,
    pub mean_poor_matching_pct: f64,
    pub mean_wall_time_s: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Mean and population standard deviation per point × solver over the
/// successful runs, in point-then-solver order.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(SweepPoint, SolverKind), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.point(), r.solver)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((point, solver), rs)| {
            let ok: Vec<&RunRecord> = rs.iter().copied().filter(|r| r.ok()).collect();
            let rates: Vec<f64> = ok.iter().map(|r| r.sum_rate).collect();
            let (mean_sum_rate, std_sum_rate) = mean_std(&rates);
            let poor: Vec<f64> = ok.iter().map(|r| r.poor_matching_pct).collect();
            let time: Vec<f64> = ok.iter().map(|r| r.wall_time_s()).collect();
            AggregateRow {
                point,
                solver,
                runs: rs.len(),
                failures: rs.len() - ok.len(),
                mean_sum_rate,
                std_sum_rate,
                mean_poor_matching_pct: mean_std(&poor).0,
                mean_wall_time_s: mean_std(&time).0,
            }
        })
        .collect()
}

pub fn write_aggregate_csv<W: Write>(rows: &[AggregateRow], timing: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "num_uavs",
        "num_gus",
        "num_subchannels",
        "solver",
        "runs",
        "failures",
        "mean_sum_rate",
        "std_sum_rate",
        "mean_poor_matching_pct",
    ];
    if timing {
        header.push("mean_wall_time_s");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut row = vec![
            r.point.num_uavs.to_string(),
            r.point.num_gus.to_string(),
            r.point.num_subchannels.to_string(),
            r.solver.to_string(),
            r.runs.to_string(),
            r.failures.to_string(),
            fmt_f(r.mean_sum_rate),
            fmt_f(r.std_sum_rate),
            fmt_f(r.mean_poor_matching_pct),
        ];
        if timing {
            row.push(fmt_f(r.mean_wall_time_s));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Record {
    pub seed: u64,
    pub algorithm: SolverKind,
    pub poor_matching_pct: f64,
    pub objective: f64,
    pub running_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub algorithm: SolverKind,
    pub poor_matching_pct: f64,
    pub objective: f64,
    /// Mean objective min-max normalized across the rows: best 0, worst 1.
    pub normalized_objective: f64,
    pub running_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2 {
    pub rows: Vec<Table2Row>,
    pub records: Vec<Table2Record>,
}

/// Clustering-only comparison of SD, SA, K-means++ and the annealer
/// stand-in on scenarios drawn from `scenario` with each master seed.
pub fn report_clustering_table(scenario: &ScenarioConfig, seeds: &[u64], params: &SolverParams) -> Result<Table2> {
    let roster = [SolverKind::Sd, SolverKind::Sa, SolverKind::Kmeanspp, SolverKind::Qa];
    let mut tasks = Vec::new();
    for &seed in seeds {
        for alg in roster {
            tasks.push((seed, alg));
        }
    }
    let records = tasks
        .into_par_iter()
        .map(|(seed, alg)| {
            let sc = generate_scenario(&ScenarioConfig { seed: scenario_seed(seed), ..scenario.clone() })?;
            let (cs, _) = stage_solvers(alg, params, solver_seed(seed));
            let res = run_cluster_stage(&sc, &cs, params.lambda_p)?;
            Ok(Table2Record {
                seed,
                algorithm: alg,
                poor_matching_pct: 100.0 * poor_matching_fraction(&res.assignment, &sc)?,
                objective: res.assignment.objective,
                running_time_s: res.time_s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<Table2Row> = roster
        .iter()
        .map(|&alg| {
            let mine: Vec<&Table2Record> = records.iter().filter(|r| r.algorithm == alg).collect();
            let avg = |f: fn(&Table2Record) -> f64| mean_std(&mine.iter().map(|r| f(r)).collect::<Vec<_>>()).0;
            Table2Row {
                algorithm: alg,
                poor_matching_pct: avg(|r| r.poor_matching_pct),
                objective: avg(|r| r.objective),
                normalized_objective: f64::NAN,
                running_time_s: avg(|r| r.running_time_s),
            }
        })
        .collect();
    let lo = rows.iter().map(|r| r.objective).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.objective).fold(f64::NEG_INFINITY, f64::max);
    for r in &mut rows {
        r.normalized_objective = if hi > lo { (r.objective - lo) / (hi - lo) } else { 0.0 };
    }
    Ok(Table2 { rows, records })
}

/// Columns `algorithm,poor_matching_pct,objective,normalized_objective`
/// plus `running_time_s` when `timing` is set.
pub fn write_table2_csv<W: Write>(table: &Table2, timing: bool, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["algorithm", "poor_matching_pct", "objective", "normalized_objective"];
    if timing {
        header.push("running_time_s");
    }
    w.write_record(&header)?;
    for r in &table.rows {
        let mut row = vec![
            r.algorithm.to_string(),
            fmt_f(r.poor_matching_pct),
            fmt_f(r.objective),
            fmt_f(r.normalized_objective),
        ];
        if timing {
            row.push(fmt_f(r.running_time_s));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    SumrateVsUavs,
    SumrateVsGus,
    RuntimeVsUavs,
    EnergyHistogram,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sumrate_vs_uavs" => Ok(PlotKind::SumrateVsUavs),
            "sumrate_vs_gus" => Ok(PlotKind::SumrateVsGus),
            "runtime_vs_uavs" => Ok(PlotKind::RuntimeVsUavs),
            "energy_histogram" => Ok(PlotKind::EnergyHistogram),
            other => Err(Error::UnknownKind(format!("plot {other}"))),
        }
    }
}

pub enum PlotSource<'a> {
    Records(&'a [RunRecord]),
    Samples(&'a SampleSet),
}

/// Plot-ready CSV.
///
/// * `sumrate_vs_uavs`: `num_subchannels,num_uavs,solver,mean_sum_rate,std_sum_rate`
/// * `sumrate_vs_gus`: `num_subchannels,num_gus,solver,mean_sum_rate,std_sum_rate`
/// * `runtime_vs_uavs`: `num_subchannels,num_uavs,solver,mean_wall_time_s`
/// * `energy_histogram`: `series,energy,count`, where series `all` lists every
///   sample and `feasible` the feasible ones.
pub fn emit_plotdata<W: Write>(source: PlotSource<'_>, kind: PlotKind, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match (source, kind) {
        (PlotSource::Samples(set), PlotKind::EnergyHistogram) => {
            w.write_record(["series", "energy", "count"])?;
            for (series, only_feasible) in [("all", false), ("feasible", true)] {
                for s in set.samples.iter().filter(|s| !only_feasible || s.feasible == Some(true)) {
                    w.write_record([series.to_string(), s.energy.to_string(), s.multiplicity.to_string()])?;
                }
            }
        }
        (PlotSource::Records(records), PlotKind::SumrateVsUavs | PlotKind::SumrateVsGus | PlotKind::RuntimeVsUavs) => {
            let x_name = if kind == PlotKind::SumrateVsGus { "num_gus" } else { "num_uavs" };
            let tail: &[&str] = if kind == PlotKind::RuntimeVsUavs {
                &["mean_wall_time_s"]
            } else {
                &["mean_sum_rate", "std_sum_rate"]
            };
            let mut header = vec!["num_subchannels", x_name, "solver"];
            header.extend_from_slice(tail);
            w.write_record(&header)?;
            for row in aggregate(records) {
                let x = if kind == PlotKind::SumrateVsGus { row.point.num_gus } else { row.point.num_uavs };
                let mut rec = vec![row.point.num_subchannels.to_string(), x.to_string(), row.solver.to_string()];
                if kind == PlotKind::RuntimeVsUavs {
                    rec.push(fmt_f(row.mean_wall_time_s));
                } else {
                    rec.extend([fmt_f(row.mean_sum_rate), fmt_f(row.std_sum_rate)]);
                }
                w.write_record(&rec)?;
            }
        }
        (_, kind) => {
            return Err(Error::InvalidParameter(format!("plot kind {kind:?} does not match the data source")));
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.as_str().parse::<SolverKind>().unwrap(), k);
        }
        assert!("qpu".parse::<SolverKind>().is_err());
        assert!("bar_chart".parse::<PlotKind>().is_err());
    }

    #[test]
    fn duplicate_seeds_rejected() {
        let cfg = ExperimentConfig { seeds: vec![1, 1], ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn empty_records_give_header_only() {
        let mut buf = Vec::new();
        emit_plotdata(PlotSource::Records(&[]), PlotKind::SumrateVsUavs, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "num_subchannels,num_uavs,solver,mean_sum_rate,std_sum_rate\n");
    }

    #[test]
    fn axis_defaults_to_template() {
        let t = ScenarioConfig::default();
        let pts = SweepAxis { num_uavs: vec![1, 2], ..Default::default() }.points(&t);
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.num_gus == t.num_gus && p.num_subchannels == t.num_subchannels));
    }

    #[test]
    fn min_max_endpoints() {
        let small = ScenarioConfig { num_gus: 12, num_uavs: 3, ..Default::default() };
        let params = SolverParams { sweeps: 100, restarts: 4, ..Default::default() };
        let t = report_clustering_table(&small, &[3], &params).unwrap();
        let norms: Vec<f64> = t.rows.iter().map(|r| r.normalized_objective).collect();
        assert!(norms.iter().all(|v| (0.0..=1.0).contains(v)));
        if t.rows.iter().any(|r| r.objective != t.rows[0].objective) {
            assert!(norms.contains(&0.0) && norms.contains(&1.0));
        }
    }
}
