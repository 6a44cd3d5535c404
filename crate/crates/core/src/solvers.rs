//! Classical QUBO samplers behind one [`Sampler`] contract.
//!
//! * [`Exhaustive`] enumerates every state in Gray-code order (ground truth).
//! * [`SteepestDescent`] flips the single best bit until no flip improves.
//! * [`SimulatedAnnealing`] runs Metropolis single-flip sweeps on a geometric
//!   inverse-temperature ladder, with independent restarts.
//! * [`Decomposing`] splits a model into connected components and samples
//!   each with an inner sampler, the way hybrid annealing services break up
//!   a problem before handing pieces to the annealer.
//!
//! All samplers report energies recomputed from the model, sorted ascending
//! with ties broken by the lexicographic order of the bit vector.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qubo::{Adjacency, QuboModel};
use crate::{Error, Result};

/// Relative threshold below which a flip does not count as an improvement.
pub const IMPROVE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub bits: Vec<bool>,
    pub energy: f64,
    pub multiplicity: usize,
    /// Set by [`SampleSet::annotate_feasibility`].
    pub feasible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub solver_name: String,
    pub wall_time_s: f64,
    pub params_echo: BTreeMap<String, String>,
}

impl SampleSet {
    /// Aggregates duplicate states, evaluates their energies on `model` and
    /// sorts them.
    pub fn from_states(model: &QuboModel, states: Vec<Vec<bool>>, solver_name: &str) -> Result<Self> {
        let mut counts: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
        for s in states {
            *counts.entry(s).or_insert(0) += 1;
        }
        let mut samples = counts
            .into_iter()
            .map(|(bits, multiplicity)| {
                let energy = model.energy(&bits)?;
                Ok(Sample { bits, energy, multiplicity, feasible: None })
            })
            .collect::<Result<Vec<_>>>()?;
        samples.sort_by(cmp_samples);
        Ok(Self { samples, solver_name: solver_name.to_string(), wall_time_s: 0.0, params_echo: BTreeMap::new() })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn best(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn lowest_energy(&self) -> Option<f64> {
        self.best().map(|s| s.energy)
    }

    /// Order-preserving subset of samples accepted by `pred`.
    pub fn filter_feasible(&self, pred: impl Fn(&[bool]) -> bool) -> SampleSet {
        SampleSet {
            samples: self
                .samples
                .iter()
                .filter(|s| pred(&s.bits))
                .cloned()
                .map(|mut s| {
                    s.feasible = Some(true);
                    s
                })
                .collect(),
            solver_name: self.solver_name.clone(),
            wall_time_s: self.wall_time_s,
            params_echo: self.params_echo.clone(),
        }
    }

    pub fn annotate_feasibility(&mut self, pred: impl Fn(&[bool]) -> bool) {
        for s in &mut self.samples {
            s.feasible = Some(pred(&s.bits));
        }
    }

    /// Writes `energy,feasible,bits_hex,multiplicity`; see [`bits_to_hex`].
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["energy", "feasible", "bits_hex", "multiplicity"])?;
        for s in &self.samples {
            w.write_record([
                format!("{:e}", s.energy),
                s.feasible.map(|f| f.to_string()).unwrap_or_default(),
                bits_to_hex(&s.bits),
                s.multiplicity.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn cmp_samples(a: &Sample, b: &Sample) -> Ordering {
    a.energy.total_cmp(&b.energy).then_with(|| a.bits.cmp(&b.bits))
}

/// Packs bits little-endian: variable `i` is bit `i % 8` of byte `i / 8`;
/// bytes are printed in order as two lowercase hex digits each.
pub fn bits_to_hex(bits: &[bool]) -> String {
    bits.chunks(8)
        .map(|chunk| {
            let byte = chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << i));
            format!("{byte:02x}")
        })
        .collect()
}

pub trait Sampler: Send + Sync {
    fn name(&self) -> String;

    fn params(&self) -> BTreeMap<String, String> {
        BTreeMap::new()
    }

    fn sample(&self, model: &QuboModel) -> Result<SampleSet>;
}

impl<S: Sampler + ?Sized> Sampler for Box<S> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn params(&self) -> BTreeMap<String, String> {
        (**self).params()
    }

    fn sample(&self, model: &QuboModel) -> Result<SampleSet> {
        (**self).sample(model)
    }
}

fn finish(mut set: SampleSet, sampler: &dyn Sampler, started: Instant) -> SampleSet {
    set.solver_name = sampler.name();
    set.params_echo = sampler.params();
    set.wall_time_s = started.elapsed().as_secs_f64();
    set
}

/// Brute-force enumeration of all `2^n` states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exhaustive {
    pub max_vars: usize,
    /// Keep only the `k` lowest states; `None` keeps all of them.
    pub keep: Option<usize>,
}

impl Default for Exhaustive {
    fn default() -> Self {
        Self { max_vars: 24, keep: Some(64) }
    }
}

#[derive(Clone, Copy)]
struct Ranked(f64, u64);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl Sampler for Exhaustive {
    fn name(&self) -> String {
        "exhaustive".into()
    }

    fn params(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("max_vars".into(), self.max_vars.to_string()),
            ("keep".into(), self.keep.map_or("all".into(), |k| k.to_string())),
        ])
    }

    fn sample(&self, model: &QuboModel) -> Result<SampleSet> {
        let started = Instant::now();
        let n = model.num_vars();
        let cap = self.max_vars.min(63);
        if n > cap {
            return Err(Error::TooLarge { what: "exhaustive enumeration", size: n, cap });
        }
        let keep = self.keep.unwrap_or(usize::MAX).max(1);
        let adj = model.adjacency();
        let mut x = vec![false; n];
        let mut fields = adj.linear.clone();
        let mut code: u64 = 0;
        let mut energy = adj.offset;
        let mut heap: BinaryHeap<Ranked> = BinaryHeap::new();
        let offer = |e: f64, c: u64, heap: &mut BinaryHeap<Ranked>| {
            if heap.len() < keep {
                heap.push(Ranked(e, c));
            } else if let Some(top) = heap.peek() {
                if Ranked(e, c) < *top {
                    heap.pop();
                    heap.push(Ranked(e, c));
                }
            }
        };
        offer(energy, code, &mut heap);
        let total: u64 = 1 << n;
        for step in 1..total {
            let i = step.trailing_zeros() as usize;
            energy += adj.flip(&mut x, &mut fields, i);
            code ^= 1 << i;
            if step & 0xFFF == 0 {
                energy = adj.energy(&x);
                fields = adj.fields(&x);
            }
            offer(energy, code, &mut heap);
        }
        let states =
            heap.into_vec().into_iter().map(|Ranked(_, c)| (0..n).map(|i| c >> i & 1 == 1).collect()).collect();
        Ok(finish(SampleSet::from_states(model, states, "exhaustive")?, self, started))
    }
}

/// Runs steepest descent from `x` in place; returns the number of flips.
///
/// Each round flips the variable with the most negative energy delta (lowest
/// index among ties). Stops at a 1-flip local minimum or after `max_rounds`.
pub fn descend(adj: &Adjacency, x: &mut [bool], max_rounds: usize) -> usize {
    let threshold = -IMPROVE_EPS * coef_scale(adj);
    let mut fields = adj.fields(x);
    for round in 0..max_rounds {
        let mut best = (threshold, usize::MAX);
        for i in 0..x.len() {
            let d = if x[i] { -fields[i] } else { fields[i] };
            if d < best.0 {
                best = (d, i);
            }
        }
        if best.1 == usize::MAX {
            return round;
        }
        adj.flip(x, &mut fields, best.1);
    }
    max_rounds
}

fn coef_scale(adj: &Adjacency) -> f64 {
    let m =
        adj.linear.iter().chain(adj.neighbors.iter().flatten().map(|(_, v)| v)).fold(0.0f64, |acc, v| acc.max(v.abs()));
    m.max(f64::MIN_POSITIVE)
}

/// True when no single flip lowers the energy by more than the tolerance.
pub fn is_local_minimum(model: &QuboModel, x: &[bool]) -> bool {
    let adj = model.adjacency();
    let threshold = -IMPROVE_EPS * coef_scale(&adj);
    let fields = adj.fields(x);
    (0..x.len()).all(|i| (if x[i] { -fields[i] } else { fields[i] }) >= threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteepestDescent {
    pub seed: u64,
    /// Independent random starts; ignored when `initial` is set.
    pub reads: usize,
    pub max_rounds: usize,
    pub initial: Option<Vec<bool>>,
}

impl Default for SteepestDescent {
    fn default() -> Self {
        Self { seed: 0, reads: 1, max_rounds: 100_000, initial: None }
    }
}

impl Sampler for SteepestDescent {
    fn name(&self) -> String {
        "steepest_descent".into()
    }

    fn params(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("seed".into(), self.seed.to_string()),
            ("reads".into(), self.reads.to_string()),
            ("max_rounds".into(), self.max_rounds.to_string()),
        ])
    }

    fn sample(&self, model: &QuboModel) -> Result<SampleSet> {
        let started = Instant::now();
        let n = model.num_vars();
        let adj = model.adjacency();
        let starts: Vec<Vec<bool>> = match &self.initial {
            Some(x) if x.len() != n => return Err(Error::LengthMismatch { expected: n, actual: x.len() }),
            Some(x) => vec![x.clone()],
            None => (0..self.reads.max(1))
                .map(|r| {
                    let mut rng = restart_rng(self.seed, r);
                    (0..n).map(|_| rng.random::<bool>()).collect()
                })
                .collect(),
        };
        let states = starts
            .into_iter()
            .map(|mut x| {
                descend(&adj, &mut x, self.max_rounds);
                x
            })
            .collect();
        Ok(finish(SampleSet::from_states(model, states, "steepest_descent")?, self, started))
    }
}

/// Steepest descent from an explicit state or from a seeded random state.
pub enum Start {
    Bits(Vec<bool>),
    Seed(u64),
}

pub fn solve_steepest_descent(model: &QuboModel, start: Start, max_rounds: usize) -> Result<SampleSet> {
    let sd = match start {
        Start::Bits(x) => SteepestDescent { initial: Some(x), max_rounds, ..Default::default() },
        Start::Seed(seed) => SteepestDescent { seed, max_rounds, ..Default::default() },
    };
    sd.sample(model)
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Annealing schedule. Unset betas are scaled from the model's largest
/// absolute coefficient `c`: `0.1 / c` initially and `10 / c` finally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaSchedule {
    pub sweeps: usize,
    pub restarts: usize,
    pub beta_initial: Option<f64>,
    pub beta_final: Option<f64>,
    pub seed: u64,
}

impl Default for SaSchedule {
    fn default() -> Self {
        Self { sweeps: 1000, restarts: 20, beta_initial: None, beta_final: None, seed: 0 }
    }
}

impl SaSchedule {
    pub fn betas(&self, model: &QuboModel) -> Result<(f64, f64)> {
        let c = model.max_abs_coef();
        let scale = if c > 0.0 { 1.0 / c } else { 1.0 };
        let b0 = self.beta_initial.unwrap_or(0.1 * scale);
        let b1 = self.beta_final.unwrap_or(10.0 * scale);
        if !(b0 > 0.0 && b1 > b0 && b1.is_finite()) {
            return Err(Error::InvalidParameter(format!("need 0 < beta_initial < beta_final, got {b0} and {b1}")));
        }
        if self.sweeps == 0 || self.restarts == 0 {
            return Err(Error::InvalidParameter("sweeps and restarts must be >= 1".into()));
        }
        Ok((b0, b1))
    }

    /// Geometric interpolation, one beta per sweep.
    pub fn ladder(&self, b0: f64, b1: f64) -> Vec<f64> {
        if self.sweeps == 1 {
            return vec![b1];
        }
        let ratio = b1 / b0;
        (0..self.sweeps).map(|s| b0 * ratio.powf(s as f64 / (self.sweeps - 1) as f64)).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulatedAnnealing {
    pub schedule: SaSchedule,
}

impl SimulatedAnnealing {
    pub fn new(schedule: SaSchedule) -> Self {
        Self { schedule }
    }
}

/// One annealing run. Returns the final state and the lowest state seen.
fn anneal(adj: &Adjacency, ladder: &[f64], rng: &mut ChaCha8Rng) -> (Vec<bool>, Vec<bool>) {
    let n = adj.num_vars();
    let mut x: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
    let mut fields = adj.fields(&x);
    let mut energy = adj.energy(&x);
    let mut best = x.clone();
    let mut best_energy = energy;
    for &beta in ladder {
        for i in 0..n {
            let d = if x[i] { -fields[i] } else { fields[i] };
            if d <= 0.0 || rng.random::<f64>() < (-beta * d).exp() {
                energy += adj.flip(&mut x, &mut fields, i);
                if energy < best_energy {
                    best_energy = energy;
                    best.copy_from_slice(&x);
                }
            }
        }
    }
    (x, best)
}

impl Sampler for SimulatedAnnealing {
    fn name(&self) -> String {
        "simulated_annealing".into()
    }

    fn params(&self) -> BTreeMap<String, String> {
        let s = &self.schedule;
        let opt = |b: Option<f64>| b.map_or("auto".into(), |v| format!("{v:e}"));
        BTreeMap::from([
            ("sweeps".into(), s.sweeps.to_string()),
            ("restarts".into(), s.restarts.to_string()),
            ("beta_initial".into(), opt(s.beta_initial)),
            ("beta_final".into(), opt(s.beta_final)),
            ("seed".into(), s.seed.to_string()),
        ])
    }

    fn sample(&self, model: &QuboModel) -> Result<SampleSet> {
        let started = Instant::now();
        let (b0, b1) = self.schedule.betas(model)?;
        let ladder = self.schedule.ladder(b0, b1);
        let adj = model.adjacency();
        let runs: Vec<(Vec<bool>, Vec<bool>)> = (0..self.schedule.restarts)
            .into_par_iter()
            .map(|r| anneal(&adj, &ladder, &mut restart_rng(self.schedule.seed, r)))
            .collect();
        let states = runs.into_iter().flat_map(|(last, best)| [last, best]).collect();
        let mut set = SampleSet::from_states(model, states, "simulated_annealing")?;
        set.params_echo.insert("beta_range".into(), format!("{b0:e}..{b1:e}"));
        let echo = set.params_echo.clone();
        let mut set = finish(set, self, started);
        set.params_echo.extend(echo);
        Ok(set)
    }
}

pub fn solve_sa(model: &QuboModel, schedule: SaSchedule) -> Result<SampleSet> {
    SimulatedAnnealing::new(schedule).sample(model)
}

pub fn solve_exhaustive(model: &QuboModel) -> Result<SampleSet> {
    Exhaustive::default().sample(model)
}

/// Samples each connected component with `inner` and stitches the results
/// rank-wise: the r-th output combines every component's r-th best state
/// (or its worst one, when it has fewer).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Decomposing<S> {
    pub inner: S,
}

impl<S> Decomposing<S> {
    pub fn new(inner: S) -> Self {
        Self { inner }
    }
}

impl<S: Sampler> Sampler for Decomposing<S> {
    fn name(&self) -> String {
        format!("decomposing({})", self.inner.name())
    }

    fn params(&self) -> BTreeMap<String, String> {
        self.inner.params()
    }

    fn sample(&self, model: &QuboModel) -> Result<SampleSet> {
        let started = Instant::now();
        let components = model.connected_components();
        if components.len() <= 1 {
            let set = self.inner.sample(model)?;
            return Ok(finish(set, self, started));
        }
        let parts: Vec<SampleSet> =
            components.par_iter().map(|c| self.inner.sample(&model.restrict(c))).collect::<Result<_>>()?;
        let depth = parts.iter().map(SampleSet::len).max().unwrap_or(0);
        let mut states = Vec::with_capacity(depth);
        for r in 0..depth {
            let mut x = vec![false; model.num_vars()];
            for (vars, part) in components.iter().zip(&parts) {
                if part.is_empty() {
                    return Err(Error::NoFeasible(format!("inner sampler {} returned nothing", part.solver_name)));
                }
                let s = &part.samples[r.min(part.len() - 1)];
                for (li, &v) in vars.iter().enumerate() {
                    x[v] = s.bits[li];
                }
            }
            states.push(x);
        }
        let set = SampleSet::from_states(model, states, "decomposing")?;
        Ok(finish(set, self, started))
    }
}
