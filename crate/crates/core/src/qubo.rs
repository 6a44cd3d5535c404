//! Sparse QUBO and Ising energy functions.
//!
//! A [`QuboModel`] stores `E(x) = Σ Q_ii x_i + Σ_{i<j} Q_ij x_i x_j + offset`
//! with quadratic keys canonicalized to `i < j` and no stored zeros. The
//! offset is carried through every transformation, so QUBO and Ising forms
//! agree exactly rather than up to a constant.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// What a binary variable stands for.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarLabel {
    #[default]
    Unlabeled,
    /// GU `gu` is associated with UAV `uav`.
    Assoc { uav: usize, gu: usize },
    /// UAV `uav` transmits on `subchannel` at power `level`.
    Alloc { uav: usize, subchannel: usize, level: usize },
}

impl fmt::Display for VarLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarLabel::Unlabeled => f.write_str("-"),
            VarLabel::Assoc { uav, gu } => write!(f, "X[{uav},{gu}]"),
            VarLabel::Alloc { uav, subchannel, level } => write!(f, "X[{uav},{subchannel},{level}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboModel {
    num_vars: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
    labels: Vec<VarLabel>,
}

impl QuboModel {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: 0.0,
            labels: vec![VarLabel::Unlabeled; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn labels(&self) -> &[VarLabel] {
        &self.labels
    }

    pub fn label(&self, var: usize) -> VarLabel {
        self.labels[var]
    }

    pub fn set_label(&mut self, var: usize, label: VarLabel) {
        self.labels[var] = label;
    }

    pub fn linear_coef(&self, i: usize) -> f64 {
        self.linear.get(&i).copied().unwrap_or(0.0)
    }

    pub fn quadratic_coef(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.quadratic.get(&key).copied().unwrap_or(0.0)
    }

    fn check_var(&self, i: usize) {
        assert!(i < self.num_vars, "variable {i} out of range 0..{}", self.num_vars);
    }

    pub fn add_linear(&mut self, i: usize, value: f64) {
        self.check_var(i);
        accumulate(&mut self.linear, i, value);
    }

    /// Adds `value * x_i * x_j`. A diagonal pair folds into the linear term
    /// since `x_i^2 = x_i`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, value: f64) {
        self.check_var(i);
        self.check_var(j);
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => accumulate(&mut self.linear, i, value),
            std::cmp::Ordering::Less => accumulate(&mut self.quadratic, (i, j), value),
            std::cmp::Ordering::Greater => accumulate(&mut self.quadratic, (j, i), value),
        }
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    pub fn num_interactions(&self) -> usize {
        self.quadratic.len()
    }

    /// Largest absolute linear or quadratic coefficient (offset excluded).
    pub fn max_abs_coef(&self) -> f64 {
        self.linear.values().chain(self.quadratic.values()).fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }

    /// Evaluates the energy at `x`.
    pub fn energy(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.num_vars {
            return Err(Error::LengthMismatch { expected: self.num_vars, actual: x.len() });
        }
        let mut e = self.offset;
        for (&i, &v) in &self.linear {
            if x[i] {
                e += v;
            }
        }
        for (&(i, j), &v) in &self.quadratic {
            if x[i] && x[j] {
                e += v;
            }
        }
        Ok(e)
    }

    /// Returns `self + weight * addend`.
    pub fn scale_and_add(&self, addend: &QuboModel, weight: f64) -> Result<QuboModel> {
        if addend.num_vars != self.num_vars {
            return Err(Error::LengthMismatch { expected: self.num_vars, actual: addend.num_vars });
        }
        let mut out = self.clone();
        for (var, (&a, &b)) in self.labels.iter().zip(&addend.labels).enumerate() {
            match (a, b) {
                (_, VarLabel::Unlabeled) => {}
                (VarLabel::Unlabeled, b) => out.labels[var] = b,
                (a, b) if a == b => {}
                (a, b) => return Err(Error::LabelCollision { var, left: a.to_string(), right: b.to_string() }),
            }
        }
        if weight == 0.0 {
            return Ok(out);
        }
        for (&i, &v) in &addend.linear {
            accumulate(&mut out.linear, i, weight * v);
        }
        for (&k, &v) in &addend.quadratic {
            accumulate(&mut out.quadratic, k, weight * v);
        }
        out.offset += weight * addend.offset;
        Ok(out)
    }

    /// Neighbour-list form used by the samplers.
    pub fn adjacency(&self) -> Adjacency {
        let mut linear = vec![0.0; self.num_vars];
        for (&i, &v) in &self.linear {
            linear[i] = v;
        }
        let mut neighbors = vec![Vec::new(); self.num_vars];
        for (&(i, j), &v) in &self.quadratic {
            neighbors[i].push((j, v));
            neighbors[j].push((i, v));
        }
        Adjacency { linear, neighbors, offset: self.offset }
    }

    /// Sub-model over `vars` (in the given order) with zero offset. Terms
    /// touching variables outside `vars` are dropped.
    pub fn restrict(&self, vars: &[usize]) -> QuboModel {
        let mut local = vec![usize::MAX; self.num_vars];
        for (li, &v) in vars.iter().enumerate() {
            local[v] = li;
        }
        let mut sub = QuboModel::new(vars.len());
        for (li, &v) in vars.iter().enumerate() {
            sub.labels[li] = self.labels[v];
            if let Some(&c) = self.linear.get(&v) {
                sub.linear.insert(li, c);
            }
        }
        for (&(i, j), &c) in &self.quadratic {
            let (a, b) = (local[i], local[j]);
            if a != usize::MAX && b != usize::MAX {
                sub.add_quadratic(a, b, c);
            }
        }
        sub
    }

    /// Partition of the variables into connected components of the
    /// interaction graph, each sorted ascending, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.num_vars).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for &(i, j) in self.quadratic.keys() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.num_vars {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        groups.into_values().collect()
    }

    /// Converts to spin form via `x = (σ + 1) / 2`.
    pub fn to_ising(&self) -> IsingModel {
        let mut h = BTreeMap::new();
        let mut j = BTreeMap::new();
        let mut offset = self.offset;
        for (&i, &q) in &self.linear {
            accumulate(&mut h, i, q / 2.0);
            offset += q / 2.0;
        }
        for (&(a, b), &q) in &self.quadratic {
            accumulate(&mut j, (a, b), q / 4.0);
            accumulate(&mut h, a, q / 4.0);
            accumulate(&mut h, b, q / 4.0);
            offset += q / 4.0;
        }
        IsingModel { num_vars: self.num_vars, h, j, offset }
    }

    /// Writes the coordinate text format:
    ///
    /// ```text
    /// p qubo 0 <num_vars> <num_linear> <num_quadratic>
    /// c offset <value>
    /// i i <value>      (linear, ascending)
    /// i j <value>      (quadratic, i < j, lexicographic)
    /// ```
    pub fn write_qubo<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "p qubo 0 {} {} {}", self.num_vars, self.linear.len(), self.quadratic.len())?;
        writeln!(out, "c offset {:e}", self.offset)?;
        for (&i, &v) in &self.linear {
            writeln!(out, "{i} {i} {v:e}")?;
        }
        for (&(i, j), &v) in &self.quadratic {
            writeln!(out, "{i} {j} {v:e}")?;
        }
        Ok(())
    }

    pub fn read_qubo<R: BufRead>(input: R) -> Result<QuboModel> {
        let mut model: Option<QuboModel> = None;
        let mut declared = (0usize, 0usize);
        let mut offset = 0.0;
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let parse_err = |msg: &str| Error::Parse { line: lineno, msg: msg.to_string() };
            let mut toks = line.split_whitespace();
            let Some(first) = toks.next() else { continue };
            match first {
                "c" => {
                    if toks.next() == Some("offset") {
                        let v = toks.next().ok_or_else(|| parse_err("offset value missing"))?;
                        offset = v.parse().map_err(|_| parse_err("bad offset value"))?;
                    }
                }
                "p" => {
                    if model.is_some() {
                        return Err(parse_err("second problem line"));
                    }
                    let rest: Vec<&str> = toks.collect();
                    if rest.len() != 5 || rest[0] != "qubo" {
                        return Err(parse_err("expected `p qubo 0 <maxnode> <nlinear> <nquadratic>`"));
                    }
                    let num = |s: &str| s.parse::<usize>().map_err(|_| parse_err("bad header count"));
                    let n = num(rest[2])?;
                    declared = (num(rest[3])?, num(rest[4])?);
                    model = Some(QuboModel::new(n));
                }
                _ => {
                    let m = model.as_mut().ok_or_else(|| parse_err("entry before problem line"))?;
                    let rest: Vec<&str> = std::iter::once(first).chain(toks).collect();
                    if rest.len() != 3 {
                        return Err(parse_err("entry needs `i j value`"));
                    }
                    let i: usize = rest[0].parse().map_err(|_| parse_err("bad index"))?;
                    let j: usize = rest[1].parse().map_err(|_| parse_err("bad index"))?;
                    let v: f64 = rest[2].parse().map_err(|_| parse_err("bad value"))?;
                    if i >= m.num_vars || j >= m.num_vars {
                        return Err(parse_err("index exceeds maxnode"));
                    }
                    let fresh = if i == j {
                        m.linear.insert(i, v).is_none()
                    } else {
                        m.quadratic.insert((i.min(j), i.max(j)), v).is_none()
                    };
                    if !fresh {
                        return Err(Error::DuplicateEntry { line: lineno, i, j });
                    }
                }
            }
        }
        let mut m = model.ok_or(Error::Parse { line: 0, msg: "missing problem line".into() })?;
        if (m.linear.len(), m.quadratic.len()) != declared {
            return Err(Error::Parse {
                line: 0,
                msg: format!(
                    "header declares {}/{} entries, found {}/{}",
                    declared.0,
                    declared.1,
                    m.linear.len(),
                    m.quadratic.len()
                ),
            });
        }
        m.linear.retain(|_, v| *v != 0.0);
        m.quadratic.retain(|_, v| *v != 0.0);
        m.offset = offset;
        Ok(m)
    }
}

pub fn export_qubo_file(model: &QuboModel, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    model.write_qubo(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn import_qubo_file(path: impl AsRef<Path>) -> Result<QuboModel> {
    QuboModel::read_qubo(BufReader::new(File::open(path)?))
}

fn accumulate<K: Ord>(map: &mut BTreeMap<K, f64>, key: K, value: f64) {
    use std::collections::btree_map::Entry;
    if value == 0.0 {
        return;
    }
    match map.entry(key) {
        Entry::Vacant(e) => {
            e.insert(value);
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += value;
            if *e.get() == 0.0 {
                e.remove();
            }
        }
    }
}

/// Spin-glass form `E(σ) = Σ h_i σ_i + Σ_{i<j} J_ij σ_i σ_j + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    pub num_vars: usize,
    pub h: BTreeMap<usize, f64>,
    pub j: BTreeMap<(usize, usize), f64>,
    pub offset: f64,
}

impl IsingModel {
    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.num_vars {
            return Err(Error::LengthMismatch { expected: self.num_vars, actual: spins.len() });
        }
        let s = |i: usize| f64::from(spins[i]);
        let mut e = self.offset;
        for (&i, &v) in &self.h {
            e += v * s(i);
        }
        for (&(a, b), &v) in &self.j {
            e += v * s(a) * s(b);
        }
        Ok(e)
    }
}

/// Σ_G (Σ_{v∈G} x_v − 1)²: zero exactly when each group has one set bit.
pub fn penalty_exactly_one(num_vars: usize, groups: &[Vec<usize>]) -> Result<QuboModel> {
    let mut model = QuboModel::new(num_vars);
    for (g, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(Error::InvalidParameter(format!("group {g} is empty")));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &v in group {
            if v >= num_vars {
                return Err(Error::InvalidParameter(format!("variable {v} out of range in group {g}")));
            }
            if !seen.insert(v) {
                return Err(Error::InvalidParameter(format!("variable {v} repeated in group {g}")));
            }
        }
        for (a, &v) in group.iter().enumerate() {
            model.add_linear(v, -1.0);
            for &w in &group[a + 1..] {
                model.add_quadratic(v, w, 2.0);
            }
        }
        model.add_offset(1.0);
    }
    Ok(model)
}

/// Neighbour lists with dense linear terms.
#[derive(Debug, Clone)]
pub struct Adjacency {
    pub linear: Vec<f64>,
    pub neighbors: Vec<Vec<(usize, f64)>>,
    pub offset: f64,
}

impl Adjacency {
    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn energy(&self, x: &[bool]) -> f64 {
        let mut e = self.offset;
        for i in 0..x.len() {
            if x[i] {
                e += self.linear[i];
                for &(j, v) in &self.neighbors[i] {
                    if j > i && x[j] {
                        e += v;
                    }
                }
            }
        }
        e
    }

    /// Local fields `f_i = Q_ii + Σ_j Q_ij x_j`; flipping `i` changes the
    /// energy by `(1 − 2 x_i) f_i`.
    pub fn fields(&self, x: &[bool]) -> Vec<f64> {
        (0..x.len())
            .map(|i| self.linear[i] + self.neighbors[i].iter().filter(|&&(j, _)| x[j]).map(|&(_, v)| v).sum::<f64>())
            .collect()
    }

    /// Applies a flip of `i`, updating `x` and `fields`; returns the energy delta.
    #[inline]
    pub fn flip(&self, x: &mut [bool], fields: &mut [f64], i: usize) -> f64 {
        let delta = if x[i] { -fields[i] } else { fields[i] };
        x[i] = !x[i];
        let sign = if x[i] { 1.0 } else { -1.0 };
        for &(j, v) in &self.neighbors[i] {
            fields[j] += sign * v;
        }
        delta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_model_energy_is_offset() {
        let mut m = QuboModel::new(3);
        m.add_offset(2.5);
        assert_eq!(m.energy(&[true, false, true]).unwrap(), 2.5);
        assert!(matches!(m.energy(&[true]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn single_variable() {
        let mut m = QuboModel::new(1);
        m.add_linear(0, 1.0);
        m.add_offset(0.5);
        assert_eq!(m.energy(&[true]).unwrap(), 1.5);
        assert_eq!(m.energy(&[false]).unwrap(), 0.5);
    }

    #[test]
    fn canonical_storage() {
        let mut m = QuboModel::new(3);
        m.add_quadratic(2, 0, 1.5);
        m.add_quadratic(0, 2, 0.5);
        m.add_quadratic(1, 1, 3.0);
        assert_eq!(m.quadratic().get(&(0, 2)), Some(&2.0));
        assert_eq!(m.linear().get(&1), Some(&3.0));
        m.add_quadratic(0, 2, -2.0);
        assert!(m.quadratic().is_empty());
    }

    #[test]
    fn ising_one_variable() {
        let mut m = QuboModel::new(1);
        m.add_linear(0, 3.0);
        let is = m.to_ising();
        assert_eq!(is.h.get(&0), Some(&1.5));
        assert_eq!(is.offset, 1.5);
        assert_eq!(is.energy(&[-1]).unwrap(), 0.0);
        assert_eq!(is.energy(&[1]).unwrap(), 3.0);
    }

    #[test]
    fn ising_pair() {
        let mut m = QuboModel::new(2);
        m.add_quadratic(0, 1, 4.0);
        let is = m.to_ising();
        assert_eq!(is.j.get(&(0, 1)), Some(&1.0));
        assert_eq!(is.h.get(&0), Some(&1.0));
        assert_eq!(is.h.get(&1), Some(&1.0));
        assert_eq!(is.offset, 1.0);
        for s in 0..4u8 {
            let x = [s & 1 == 1, s & 2 == 2];
            let spins: Vec<i8> = x.iter().map(|&b| if b { 1 } else { -1 }).collect();
            assert_eq!(m.energy(&x).unwrap(), is.energy(&spins).unwrap());
        }
    }

    #[test]
    fn penalty_examples() {
        let p = penalty_exactly_one(2, &[vec![0, 1]]).unwrap();
        assert_eq!(p.energy(&[true, false]).unwrap(), 0.0);
        assert_eq!(p.energy(&[true, true]).unwrap(), 1.0);
        assert_eq!(p.energy(&[false, false]).unwrap(), 1.0);
        let p5 = penalty_exactly_one(5, &[vec![0, 1, 2, 3, 4]]).unwrap();
        assert_eq!(p5.energy(&[true; 5]).unwrap(), 16.0);
        assert!(penalty_exactly_one(2, &[vec![]]).is_err());
        assert!(penalty_exactly_one(2, &[vec![0, 0]]).is_err());
    }

    #[test]
    fn scale_and_add_basics() {
        let mut a = QuboModel::new(2);
        a.add_linear(0, 1.0);
        a.add_quadratic(0, 1, -2.0);
        a.add_offset(0.5);
        assert_eq!(a.scale_and_add(&a, 0.0).unwrap(), a);
        let d = a.scale_and_add(&a, 1.0).unwrap();
        assert_eq!(d.linear_coef(0), 2.0);
        assert_eq!(d.quadratic_coef(1, 0), -4.0);
        assert_eq!(d.offset(), 1.0);

        let mut b = QuboModel::new(2);
        a.set_label(0, VarLabel::Assoc { uav: 0, gu: 0 });
        b.set_label(0, VarLabel::Assoc { uav: 1, gu: 0 });
        assert!(matches!(a.scale_and_add(&b, 1.0), Err(Error::LabelCollision { var: 0, .. })));
    }

    #[test]
    fn file_format_empty_and_fixture() {
        let mut buf = Vec::new();
        QuboModel::new(0).write_qubo(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "p qubo 0 0 0 0\nc offset 0e0\n");

        let mut m = QuboModel::new(3);
        m.add_linear(0, -1.0);
        m.add_linear(2, 0.25);
        m.add_quadratic(0, 1, 2.0);
        m.add_quadratic(1, 2, -3.5);
        m.add_offset(1.5);
        let render = |m: &QuboModel| {
            let mut b = Vec::new();
            m.write_qubo(&mut b).unwrap();
            String::from_utf8(b).unwrap()
        };
        let text = render(&m);
        assert_eq!(text, "p qubo 0 3 2 2\nc offset 1.5e0\n0 0 -1e0\n2 2 2.5e-1\n0 1 2e0\n1 2 -3.5e0\n");
        assert_eq!(render(&m), text);
        let back = QuboModel::read_qubo(text.as_bytes()).unwrap();
        assert_eq!(render(&back), text);
    }

    #[test]
    fn file_format_errors() {
        let dup = "p qubo 0 2 1 1\n0 0 1\n0 0 2\n";
        assert!(matches!(QuboModel::read_qubo(dup.as_bytes()), Err(Error::DuplicateEntry { line: 3, .. })));
        let dup_q = "p qubo 0 2 0 2\n0 1 1\n1 0 2\n";
        assert!(matches!(QuboModel::read_qubo(dup_q.as_bytes()), Err(Error::DuplicateEntry { .. })));
        for bad in ["0 0 1\n", "p qubo 0 2 1 0\n0 x 1\n", "p qubo 0 2 1 0\n", "p qubo 0 1 1 0\n3 3 1\n"] {
            assert!(matches!(QuboModel::read_qubo(bad.as_bytes()), Err(Error::Parse { .. })), "{bad}");
        }
    }

    #[test]
    fn components_and_restriction() {
        let mut m = QuboModel::new(5);
        m.add_quadratic(0, 3, 1.0);
        m.add_quadratic(3, 4, 1.0);
        m.add_linear(1, 2.0);
        let comps = m.connected_components();
        assert_eq!(comps, vec![vec![0, 3, 4], vec![1], vec![2]]);
        let sub = m.restrict(&comps[0]);
        assert_eq!(sub.num_vars(), 3);
        assert_eq!(sub.quadratic_coef(0, 1), 1.0);
        assert_eq!(sub.quadratic_coef(1, 2), 1.0);
    }
}
