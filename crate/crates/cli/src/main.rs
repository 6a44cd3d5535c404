//! `uavqa` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use uavqa::allocation::{dinkelbach_run, AllocationRun, DinkelbachParams, FractionalObjective};
use uavqa::clustering::{
    build_clustering_qubo, nearest_uav_assignment, penalty_bound_clustering, poor_matching_fraction, BoundMode,
    ClusterAssignment,
};
use uavqa::experiments::{
    aggregate, emit_plotdata, report_clustering_table, run_cluster_stage, stage_solvers, sweep, write_aggregate_csv,
    write_records_csv, write_table2_csv, ExperimentConfig, PlotKind, PlotSource, SolverKind, SweepPoint,
};
use uavqa::netmodel::Scenario;
use uavqa::qubo::export_qubo_file;
use uavqa::seeds::solver_seed;
use uavqa::solvers::Exhaustive;

#[derive(Parser)]
#[command(name = "uavqa", version, about = "QUBO clustering and resource allocation for multi-UAV downlinks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment config JSON (scenario, sweep axis, roster, seeds, solver).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Solver roster, comma separated: exhaustive, sd, sa, qa, kmeanspp.
    #[arg(long, global = true, value_delimiter = ',')]
    solver: Vec<SolverKind>,
    #[arg(long, global = true)]
    sweeps: Option<usize>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Dinkelbach tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Directory for output files; created if missing.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cross-check against brute force where the instance is small enough.
    #[arg(long, global = true)]
    oracle: bool,
    /// Scenario JSON from `gen`, used instead of generating one.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario and print it as JSON.
    Gen,
    /// Associate GUs with UAVs.
    Cluster,
    /// Allocate sub-channels and power levels for a fixed association.
    Allocate {
        /// Association JSON from `cluster`; defaults to nearest-UAV.
        #[arg(long)]
        assignment: Option<PathBuf>,
    },
    /// Clustering followed by allocation.
    Pipeline,
    /// Run every sweep point, solver and seed of the config.
    Sweep,
    /// Clustering comparison table over the config seeds.
    Table2,
    /// Write a QUBO model in text form.
    ExportQubo {
        #[arg(long, value_enum, default_value = "clustering")]
        stage: Stage,
        /// Penalty weight; defaults to the heuristic bound.
        #[arg(long)]
        lambda: Option<f64>,
        /// Ratio parameter of the allocation cost.
        #[arg(long, default_value_t = 0.0)]
        lambda_i: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Stage {
    Clustering,
    Allocation,
}

struct Session {
    config: ExperimentConfig,
    common: Common,
}

impl Session {
    fn load(common: Common) -> anyhow::Result<Self> {
        let mut config = match &common.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = common.seed {
            config.seeds = vec![seed];
        }
        if !common.solver.is_empty() {
            config.roster = common.solver.clone();
        }
        if let Some(v) = common.sweeps {
            config.solver.sweeps = v;
        }
        if let Some(v) = common.restarts {
            config.solver.restarts = v;
        }
        if let Some(v) = common.tol {
            config.solver.tol = v;
        }
        config.validate()?;
        if let Some(dir) = &common.out {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(Self { config, common })
    }

    fn seed(&self) -> u64 {
        self.config.seeds[0]
    }

    fn solver(&self) -> SolverKind {
        self.config.roster[0]
    }

    fn scenario(&self) -> anyhow::Result<Scenario> {
        if let Some(path) = &self.common.scenario {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            return Ok(Scenario::from_json(&text)?);
        }
        let s = &self.config.scenario;
        let point = SweepPoint { num_uavs: s.num_uavs, num_gus: s.num_gus, num_subchannels: s.num_subchannels };
        Ok(self.config.scenario_at(point, self.seed())?)
    }

    fn write(&self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> uavqa::Result<()>) -> anyhow::Result<Option<PathBuf>> {
        let Some(dir) = &self.common.out else { return Ok(None) };
        let mut buf = Vec::new();
        f(&mut buf)?;
        let path = dir.join(name);
        fs::write(&path, buf).with_context(|| format!("writing {}", path.display()))?;
        Ok(Some(path))
    }

    fn write_text(&self, name: &str, text: &str) -> anyhow::Result<Option<PathBuf>> {
        self.write(name, |b| {
            b.extend_from_slice(text.as_bytes());
            Ok(())
        })
    }
}

fn cluster_summary(scenario: &Scenario, a: &ClusterAssignment, oracle: bool) -> anyhow::Result<Value> {
    let mut v = json!({
        "objective": a.objective,
        "feasible": a.is_feasible(),
        "poor_matching_pct": 100.0 * poor_matching_fraction(a, scenario)?,
        "uav_of_gu": a.is_feasible().then(|| a.uav_of_gu()),
    });
    if oracle {
        // The constraint set decomposes per GU, so the nearest-UAV rule is the exact optimum.
        let best = nearest_uav_assignment(scenario)?.objective;
        v["oracle"] = json!({
            "objective": best,
            "gap": a.objective - best,
            "optimal": (a.objective - best).abs() <= 1e-9 * best.abs().max(1.0),
        });
    }
    Ok(v)
}

fn allocation_summary(
    scenario: &Scenario,
    association: &ClusterAssignment,
    run: &AllocationRun,
    params: &DinkelbachParams,
    oracle: bool,
) -> anyhow::Result<Value> {
    let mut v = json!({
        "sum_rate": run.plan.sum_rate,
        "ratio": run.plan.ratio,
        "converged": run.converged,
        "dinkelbach_iters": run.plan.dinkelbach_iters,
        "residual_f": run.plan.residual_f,
        "subchannel_of_uav": run.plan.subchannel_of_uav,
        "power_dbm": run.plan.power_dbm,
        "solve_time_s": run.solve_time_s,
    });
    if oracle {
        let vars = FractionalObjective::new(scenario, association)?.vars.len();
        let ex = Exhaustive::default();
        v["oracle"] = if vars <= ex.max_vars {
            let best = dinkelbach_run(scenario, association, &ex, params)?;
            json!({
                "ratio": best.plan.ratio,
                "sum_rate": best.plan.sum_rate,
                "ratio_gap": best.plan.ratio - run.plan.ratio,
            })
        } else {
            json!({ "skipped": format!("{vars} variables exceed the exhaustive cap of {}", ex.max_vars) })
        };
    }
    Ok(v)
}

fn cmd_gen(s: &Session) -> anyhow::Result<Value> {
    let scenario = s.scenario()?;
    let text = scenario.to_json()?;
    if s.write_text("scenario.json", &text)?.is_none() {
        return Ok(serde_json::from_str(&text)?);
    }
    Ok(json!({ "num_uavs": scenario.num_uavs(), "num_gus": scenario.num_gus(), "seed": scenario.seed }))
}

fn cmd_cluster(s: &Session) -> anyhow::Result<Value> {
    let scenario = s.scenario()?;
    let (cs, _) = stage_solvers(s.solver(), &s.config.solver, solver_seed(s.seed()));
    let stage = run_cluster_stage(&scenario, &cs, s.config.solver.lambda_p)?;
    s.write_text("assignment.json", &serde_json::to_string_pretty(&stage.assignment)?)?;
    if let Some(samples) = &stage.samples {
        s.write("cluster_samples.csv", |b| samples.write_csv(b))?;
        s.write("cluster_energy_histogram.csv", |b| {
            emit_plotdata(PlotSource::Samples(samples), PlotKind::EnergyHistogram, b)
        })?;
    }
    let mut v = cluster_summary(&scenario, &stage.assignment, s.common.oracle)?;
    v["solver"] = json!(s.solver());
    v["lambda_p"] = json!(stage.lambda_p);
    v["solve_time_s"] = json!(stage.time_s);
    Ok(v)
}

fn cmd_allocate(s: &Session, assignment: Option<&Path>) -> anyhow::Result<Value> {
    let scenario = s.scenario()?;
    let association = match assignment {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let a: ClusterAssignment = serde_json::from_str(&text)?;
            if a.num_uavs() != scenario.num_uavs() || a.num_gus() != scenario.num_gus() {
                bail!(uavqa::Error::InvalidParameter("assignment does not match the scenario size".into()));
            }
            a
        }
        None => nearest_uav_assignment(&scenario)?,
    };
    let (_, sampler) = stage_solvers(s.solver(), &s.config.solver, solver_seed(s.seed()));
    let run = dinkelbach_run(&scenario, &association, sampler.as_ref(), &s.config.solver.dinkelbach())?;
    s.write_text("plan.json", &run.plan.to_json()?)?;
    s.write("alloc_samples.csv", |b| run.samples.write_csv(b))?;
    let mut v = allocation_summary(&scenario, &association, &run, &s.config.solver.dinkelbach(), s.common.oracle)?;
    v["solver"] = json!(s.solver());
    Ok(v)
}

fn cmd_pipeline(s: &Session) -> anyhow::Result<Value> {
    let scenario = s.scenario()?;
    let (cs, sampler) = stage_solvers(s.solver(), &s.config.solver, solver_seed(s.seed()));
    let out = uavqa::experiments::pipeline(
        &scenario,
        &cs,
        sampler.as_ref(),
        s.config.solver.lambda_p,
        &s.config.solver.dinkelbach(),
    )?;
    s.write_text("assignment.json", &serde_json::to_string_pretty(&out.cluster.assignment)?)?;
    s.write_text("plan.json", &out.allocation.plan.to_json()?)?;
    let mut cluster = cluster_summary(&scenario, &out.cluster.assignment, s.common.oracle)?;
    cluster["solve_time_s"] = json!(out.cluster.time_s);
    let allocation = allocation_summary(
        &scenario,
        &out.cluster.assignment,
        &out.allocation,
        &s.config.solver.dinkelbach(),
        s.common.oracle,
    )?;
    Ok(json!({
        "solver": s.solver(),
        "seed": s.seed(),
        "sum_rate": out.sum_rate,
        "cluster": cluster,
        "allocation": allocation,
    }))
}

fn cmd_sweep(s: &Session) -> anyhow::Result<Value> {
    let records = sweep(&s.config)?;
    let rows = aggregate(&records);
    s.write("records.csv", |b| write_records_csv(&records, true, b))?;
    s.write("aggregate.csv", |b| write_aggregate_csv(&rows, true, b))?;
    for (name, kind) in [
        ("sumrate_vs_uavs.csv", PlotKind::SumrateVsUavs),
        ("sumrate_vs_gus.csv", PlotKind::SumrateVsGus),
        ("runtime_vs_uavs.csv", PlotKind::RuntimeVsUavs),
    ] {
        s.write(name, |b| emit_plotdata(PlotSource::Records(&records), kind, b))?;
    }
    let failed = records.iter().filter(|r| !r.ok()).count();
    let aggregate: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "num_uavs": r.point.num_uavs,
                "num_gus": r.point.num_gus,
                "num_subchannels": r.point.num_subchannels,
                "solver": r.solver,
                "mean_sum_rate": r.mean_sum_rate,
                "std_sum_rate": r.std_sum_rate,
            })
        })
        .collect();
    Ok(json!({ "runs": records.len(), "failed": failed, "aggregate": aggregate }))
}

fn cmd_table2(s: &Session) -> anyhow::Result<Value> {
    let table = report_clustering_table(&s.config.scenario, &s.config.seeds, &s.config.solver)?;
    s.write("table2.csv", |b| write_table2_csv(&table, true, b))?;
    Ok(json!({ "rows": table.rows }))
}

fn cmd_export(s: &Session, stage: Stage, lambda: Option<f64>, lambda_i: f64) -> anyhow::Result<Value> {
    let scenario = s.scenario()?;
    let (model, name, penalty) = match stage {
        Stage::Clustering => {
            let l = match lambda {
                Some(l) => l,
                None => penalty_bound_clustering(&scenario, BoundMode::Heuristic)?.chosen,
            };
            (build_clustering_qubo(&scenario, l)?, "clustering.qubo", l)
        }
        Stage::Allocation => {
            let obj = FractionalObjective::new(&scenario, &nearest_uav_assignment(&scenario)?)?;
            let l = lambda.unwrap_or_else(|| obj.heuristic_penalty(lambda_i).chosen);
            (obj.qubo(lambda_i, l)?, "allocation.qubo", l)
        }
    };
    let path = match &s.common.out {
        Some(dir) => {
            let p = dir.join(name);
            export_qubo_file(&model, &p)?;
            Some(p)
        }
        None => {
            model.write_qubo(std::io::stdout().lock())?;
            return Ok(Value::Null);
        }
    };
    Ok(json!({
        "path": path,
        "num_vars": model.num_vars(),
        "num_interactions": model.num_interactions(),
        "penalty": penalty,
    }))
}

fn run(cli: Cli) -> anyhow::Result<Value> {
    let session = Session::load(cli.common)?;
    match &cli.command {
        Command::Gen => cmd_gen(&session),
        Command::Cluster => cmd_cluster(&session),
        Command::Allocate { assignment } => cmd_allocate(&session, assignment.as_deref()),
        Command::Pipeline => cmd_pipeline(&session),
        Command::Sweep => cmd_sweep(&session),
        Command::Table2 => cmd_table2(&session),
        Command::ExportQubo { stage, lambda, lambda_i } => cmd_export(&session, *stage, *lambda, *lambda_i),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Value::Null) => ExitCode::SUCCESS,
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("serializable summary"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let kind = e.downcast_ref::<uavqa::Error>().map_or("runtime", |e| e.kind());
            let msg = format!("{e:#}");
            eprintln!("{}", json!({ "error": kind, "message": msg }));
            ExitCode::FAILURE
        }
    }
}
