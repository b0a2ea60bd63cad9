//! Branch-and-bound over the simplex.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::simplex::{Outcome, Simplex};
use crate::model::{MilpModel, VarKind, VarRole};
use crate::qubo::{qubo_value_rounded, QuboInstance, Rational};

/// Distance from an integer below which a binary counts as integral.
pub const INT_TOL: f64 = 1e-6;
const PRUNE_TOL: f64 = 1e-6;
/// Open nodes keep their parent's tableau until this many bytes are held;
/// beyond it they restart from the root basis.
const WARM_BUDGET_BYTES: usize = 256 << 20;

type BoundChange = (usize, f64, f64);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MilpOptions {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    /// Stop as soon as the first incumbent is known.
    pub stop_after_first_incumbent: bool,
    /// Binary `x` assignment offered as the first incumbent. The remaining
    /// columns are completed by a feasibility LP.
    pub mip_start: Option<Vec<u8>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MilpStatus {
    Optimal,
    /// The search stopped early; an incumbent may or may not exist.
    FeasibleTimeout,
    Infeasible,
    Unbounded,
}

impl MilpStatus {
    pub fn name(self) -> &'static str {
        match self {
            MilpStatus::Optimal => "OPTIMAL",
            MilpStatus::FeasibleTimeout => "FEASIBLE_TIMEOUT",
            MilpStatus::Infeasible => "INFEASIBLE",
            MilpStatus::Unbounded => "UNBOUNDED",
        }
    }
}

impl fmt::Display for MilpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MilpResult {
    pub status: MilpStatus,
    /// Incumbent column values, binaries rounded.
    pub incumbent: Option<Vec<f64>>,
    /// Objective of the incumbent in the model.
    pub model_objective: Option<f64>,
    /// The incumbent's `x` part.
    pub x: Option<Vec<u8>>,
    /// QUBO objective of `x`, evaluated exactly.
    pub recomputed: Option<Rational>,
    pub best_bound: f64,
    pub root_bound: f64,
    pub nodes: usize,
    pub elapsed: Duration,
}

impl MilpResult {
    pub fn gap(&self) -> Option<f64> {
        self.model_objective.map(|z| self.best_bound - z)
    }
}

/// A machine-readable progress record, printed as `key=value` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct Progress {
    pub event: &'static str,
    pub node: usize,
    pub objective: Option<f64>,
    pub recomputed: Option<Rational>,
    pub bound: f64,
    pub elapsed: Duration,
}

impl fmt::Display for Progress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "event={} node={}", self.event, self.node)?;
        if let Some(z) = self.objective {
            write!(f, " objective={z}")?;
        }
        if let Some(r) = self.recomputed {
            write!(f, " recomputed={r}")?;
        }
        write!(f, " bound={} elapsed_ms={}", self.bound, self.elapsed.as_millis())
    }
}

struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    bounds: Vec<(usize, f64, f64)>,
    warm: Arc<Simplex>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Incumbent {
    values: Vec<f64>,
    objective: f64,
}

struct Search<'a> {
    model: &'a MilpModel,
    inst: Option<&'a QuboInstance>,
    opts: &'a MilpOptions,
    start: Instant,
    /// Binary columns in branching order: `x` columns first.
    candidates: Vec<usize>,
    split: usize,
    incumbent: Option<Incumbent>,
    nodes: usize,
}

impl Search<'_> {
    fn recompute(&self, values: &[f64]) -> (Option<Vec<u8>>, Option<Rational>) {
        let cols = self.model.x_columns();
        if cols.is_empty() || cols.iter().any(Option::is_none) {
            return (None, None);
        }
        let xs: Vec<f64> = cols.iter().map(|c| values[c.expect("checked")]).collect();
        let bits: Vec<u8> = xs.iter().map(|v| v.round().clamp(0.0, 1.0) as u8).collect();
        let rec = self
            .inst
            .filter(|i| i.n() == bits.len())
            .and_then(|i| qubo_value_rounded(i, &xs, INT_TOL).ok());
        (Some(bits), rec)
    }

    fn progress(&self, event: &'static str, bound: f64, cb: &mut dyn FnMut(&Progress)) {
        let (objective, recomputed) = match &self.incumbent {
            Some(inc) => (Some(inc.objective), self.recompute(&inc.values).1),
            None => (None, None),
        };
        cb(&Progress {
            event,
            node: self.nodes,
            objective,
            recomputed,
            bound,
            elapsed: self.start.elapsed(),
        });
    }

    fn offer(&mut self, mut values: Vec<f64>) -> bool {
        for &j in &self.candidates {
            values[j] = values[j].round();
        }
        let objective = self.model.objective_value(&values);
        let better = self.incumbent.as_ref().is_none_or(|inc| objective > inc.objective + 1e-9);
        if better {
            self.incumbent = Some(Incumbent { values, objective });
        }
        better
    }

    fn fractional(&self, x: &[f64]) -> Option<usize> {
        for range in [0..self.split, self.split..self.candidates.len()] {
            let mut best: Option<(usize, f64)> = None;
            for &j in &self.candidates[range] {
                let f = x[j] - x[j].floor();
                let dist = f.min(1.0 - f);
                if dist > INT_TOL && best.is_none_or(|(_, d)| dist > d + 1e-12) {
                    best = Some((j, dist));
                }
            }
            if let Some((j, _)) = best {
                return Some(j);
            }
        }
        None
    }

    fn out_of_budget(&self) -> bool {
        self.opts.time_limit.is_some_and(|t| self.start.elapsed() >= t)
            || self.opts.node_limit.is_some_and(|n| self.nodes >= n)
    }
}

fn completion(model: &MilpModel, x: &[u8]) -> Result<Option<Vec<f64>>> {
    let cols = model.x_columns();
    if cols.len() != x.len() || cols.iter().any(Option::is_none) {
        return Err(Error::DimensionMismatch {
            expected: cols.len(),
            got: x.len(),
        });
    }
    let mut fixed = model.clone();
    fixed.objective.iter_mut().for_each(|c| *c = 0.0);
    for (c, &b) in cols.iter().zip(x) {
        let v = &mut fixed.variables[c.expect("checked")];
        v.lower = b as f64;
        v.upper = b as f64;
    }
    let mut s = Simplex::new(&fixed);
    Ok(match s.solve_primal()? {
        Outcome::Optimal => Some(s.primal()),
        _ => None,
    })
}

fn finish(search: &Search<'_>, status: MilpStatus, best_bound: f64, root_bound: f64) -> MilpResult {
    let (incumbent, model_objective, x, recomputed) = match &search.incumbent {
        Some(inc) => {
            let (x, rec) = search.recompute(&inc.values);
            (Some(inc.values.clone()), Some(inc.objective), x, rec)
        }
        None => (None, None, None, None),
    };
    MilpResult {
        status,
        incumbent,
        model_objective,
        x,
        recomputed,
        best_bound,
        root_bound,
        nodes: search.nodes,
        elapsed: search.start.elapsed(),
    }
}

/// Solves `model` built from `inst` to optimality or until a budget runs out.
pub fn solve_milp(model: &MilpModel, inst: &QuboInstance, opts: &MilpOptions) -> Result<MilpResult> {
    solve_milp_observed(model, inst, opts, &mut |_| {})
}

/// [`solve_milp`] reporting incumbents and the final state to `on_progress`.
pub fn solve_milp_observed(
    model: &MilpModel,
    inst: &QuboInstance,
    opts: &MilpOptions,
    on_progress: &mut dyn FnMut(&Progress),
) -> Result<MilpResult> {
    let fp = inst.fingerprint();
    if model.meta.instance_fingerprint != fp {
        return Err(Error::FingerprintMismatch {
            model: model.meta.instance_fingerprint.clone(),
            instance: fp,
        });
    }
    branch_and_bound(model, Some(inst), opts, on_progress)
}

/// Branch-and-bound on a model that is not tied to an instance; nothing is
/// recomputed.
pub fn solve_model(model: &MilpModel, opts: &MilpOptions) -> Result<MilpResult> {
    branch_and_bound(model, None, opts, &mut |_| {})
}

fn branch_and_bound(
    model: &MilpModel,
    inst: Option<&QuboInstance>,
    opts: &MilpOptions,
    cb: &mut dyn FnMut(&Progress),
) -> Result<MilpResult> {
    model.validate()?;
    let is_bin = |v: &&crate::model::Variable| v.kind == VarKind::Binary;
    let mut candidates: Vec<usize> = Vec::new();
    for (j, v) in model.variables.iter().enumerate() {
        if is_bin(&v) && matches!(v.role, Some(VarRole::X(_))) {
            candidates.push(j);
        }
    }
    let split = candidates.len();
    for (j, v) in model.variables.iter().enumerate() {
        if is_bin(&v) && !matches!(v.role, Some(VarRole::X(_))) {
            candidates.push(j);
        }
    }
    let mut search = Search {
        model,
        inst,
        opts,
        start: Instant::now(),
        candidates,
        split,
        incumbent: None,
        nodes: 0,
    };

    if let Some(x) = &opts.mip_start {
        if let Some(values) = completion(model, x)? {
            let integral = search.candidates.iter().all(|&j| (values[j] - values[j].round()).abs() <= INT_TOL);
            if integral && search.offer(values) {
                search.progress("incumbent", f64::INFINITY, cb);
            }
        }
    }

    let mut root = Simplex::new(model);
    let outcome = root.solve_primal()?;
    search.nodes = 1;
    match outcome {
        Outcome::Infeasible => {
            search.progress("done", f64::NEG_INFINITY, cb);
            let status = if search.incumbent.is_some() {
                MilpStatus::FeasibleTimeout
            } else {
                MilpStatus::Infeasible
            };
            return Ok(finish(&search, status, f64::NEG_INFINITY, f64::NEG_INFINITY));
        }
        Outcome::Unbounded => {
            search.progress("done", f64::INFINITY, cb);
            return Ok(finish(&search, MilpStatus::Unbounded, f64::INFINITY, f64::INFINITY));
        }
        Outcome::Optimal => {}
    }
    let root_bound = root.objective();
    let state_bytes = (root.rows() * (root.rows() + root.structural()) + 8 * root.x.len()) * 8;
    let warm_cap = (WARM_BUDGET_BYTES / state_bytes.max(1)).max(16);
    let root = Arc::new(root);

    if opts.stop_after_first_incumbent && search.incumbent.is_some() {
        search.progress("stopped", root_bound, cb);
        return Ok(finish(&search, MilpStatus::FeasibleTimeout, root_bound, root_bound));
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let mut pending: Option<(Simplex, usize, Vec<BoundChange>)> = Some(((*root).clone(), 0, Vec::new()));
    let mut stopped_bound: Option<f64> = None;

    loop {
        let (s, depth, bounds) = match pending.take() {
            Some(p) => p,
            None => {
                let Some(node) = heap.pop() else { break };
                let node: Node = node;
                let inc = search.incumbent.as_ref().map_or(f64::NEG_INFINITY, |i| i.objective);
                if node.bound <= inc + PRUNE_TOL {
                    continue;
                }
                if search.out_of_budget() {
                    stopped_bound = Some(node.bound);
                    heap.push(node);
                    break;
                }
                search.nodes += 1;
                let mut s = (*node.warm).clone();
                for &(j, lo, hi) in &node.bounds {
                    s.set_bounds(j, lo, hi);
                }
                match s.solve_dual()? {
                    Outcome::Optimal => {}
                    Outcome::Infeasible => continue,
                    Outcome::Unbounded => {
                        return Ok(finish(&search, MilpStatus::Unbounded, f64::INFINITY, root_bound));
                    }
                }
                (s, node.depth, node.bounds)
            }
        };
        let z = s.objective();
        let inc = search.incumbent.as_ref().map_or(f64::NEG_INFINITY, |i| i.objective);
        if z <= inc + PRUNE_TOL {
            continue;
        }
        let x = s.primal();
        match search.fractional(&x) {
            None => {
                if search.offer(x) {
                    search.progress("incumbent", z.max(heap.peek().map_or(z, |n: &Node| n.bound)), cb);
                    if opts.stop_after_first_incumbent {
                        stopped_bound = Some(heap.peek().map_or(z, |n| n.bound.max(z)));
                        break;
                    }
                }
            }
            Some(j) => {
                let warm = if heap.len() < warm_cap { Arc::new(s) } else { Arc::clone(&root) };
                let v = x[j];
                for (lo, hi) in [(v.floor().max(0.0), v.floor().max(0.0)), (v.ceil().min(1.0), v.ceil().min(1.0))] {
                    let mut b = bounds.clone();
                    b.push((j, lo, hi));
                    heap.push(Node {
                        bound: z,
                        depth: depth + 1,
                        seq,
                        bounds: b,
                        warm: Arc::clone(&warm),
                    });
                    seq += 1;
                }
            }
        }
    }

    let status;
    let best_bound;
    match stopped_bound {
        Some(b) => {
            let open = heap.iter().map(|n: &Node| n.bound).fold(b, f64::max);
            let inc = search.incumbent.as_ref().map_or(f64::NEG_INFINITY, |i| i.objective);
            best_bound = open.max(inc);
            status = MilpStatus::FeasibleTimeout;
        }
        None => match &search.incumbent {
            Some(inc) => {
                best_bound = inc.objective;
                status = MilpStatus::Optimal;
            }
            None => {
                best_bound = f64::NEG_INFINITY;
                status = MilpStatus::Infeasible;
            }
        },
    }
    search.progress("done", best_bound, cb);
    Ok(finish(&search, status, best_bound, root_bound))
}

/// Per-`x` summary of the integral feasible set of a model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralPoint {
    pub x: Vec<u8>,
    pub feasible: bool,
    /// `(i, j, min, max)` of every `y_ij` over the feasible completions.
    pub y_ranges: Vec<(usize, usize, f64, f64)>,
    /// A feasible completion with some `y_ij ≠ x_i x_j`, if one exists.
    pub witness: Option<Vec<f64>>,
}

impl IntegralPoint {
    pub fn products_forced(&self) -> bool {
        self.witness.is_none()
    }
}

/// Enumerates every binary `x` (at most `2^n_cap` of them) and, for each,
/// the range of every `y_ij` over feasible completions, found by
/// maximizing and minimizing `y_ij` with the other binaries kept integral.
pub fn feasible_integral_enumeration(model: &MilpModel, inst: &QuboInstance, n_cap: usize) -> Result<Vec<IntegralPoint>> {
    let n = inst.n();
    if n > n_cap {
        return Err(Error::CapExceeded { n, cap: n_cap });
    }
    let cols = model.x_columns();
    if cols.len() != n || cols.iter().any(Option::is_none) {
        return Err(Error::InvalidModel("model does not have one x column per instance variable".into()));
    }
    let ys: Vec<(usize, usize, usize)> = model
        .variables
        .iter()
        .enumerate()
        .filter_map(|(k, v)| match v.role {
            Some(VarRole::Y(i, j)) => Some((k, i, j)),
            _ => None,
        })
        .collect();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let x: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
        let mut fixed = model.clone();
        for (c, &b) in cols.iter().zip(&x) {
            let v = &mut fixed.variables[c.expect("checked")];
            v.lower = b as f64;
            v.upper = b as f64;
        }
        let mut point = IntegralPoint {
            x: x.clone(),
            feasible: true,
            y_ranges: Vec::with_capacity(ys.len()),
            witness: None,
        };
        fixed.objective.iter_mut().for_each(|c| *c = 0.0);
        let feas = solve_model(&fixed, &MilpOptions::default())?;
        if feas.status != MilpStatus::Optimal {
            point.feasible = false;
            out.push(point);
            continue;
        }
        for &(k, i, j) in &ys {
            let product = (x[i] * x[j]) as f64;
            let mut ends = [0.0; 2];
            for (slot, sign) in [(0usize, -1.0), (1usize, 1.0)] {
                fixed.objective.iter_mut().for_each(|c| *c = 0.0);
                fixed.objective[k] = sign;
                let r = solve_model(&fixed, &MilpOptions::default())?;
                let values = match (r.status, r.incumbent) {
                    (MilpStatus::Optimal, Some(v)) => v,
                    (MilpStatus::Unbounded, _) => {
                        ends[slot] = sign * f64::INFINITY;
                        if point.witness.is_none() {
                            point.witness = feas.incumbent.clone();
                        }
                        continue;
                    }
                    _ => return Err(Error::NotOptimal(format!("y{}_{} subproblem", i + 1, j + 1))),
                };
                ends[slot] = values[k];
                if (values[k] - product).abs() > INT_TOL && point.witness.is_none() {
                    point.witness = Some(values);
                }
            }
            point.y_ranges.push((i, j, ends[0], ends[1]));
        }
        out.push(point);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulations::{build, build_with, BuildOptions, Family, ModelId, WeightSet};
    use crate::instances::fixtures;

    fn unit(id: &str, inst: &QuboInstance) -> MilpModel {
        let opts = BuildOptions {
            allow_invalid: true,
            ..Default::default()
        };
        build_with(&id.parse().unwrap(), inst, &WeightSet::unit(), &opts).unwrap()
    }

    #[test]
    fn ex2_optimum_six() {
        let inst = fixtures::ex2();
        for id in ["DW", "GW", "FT", "PK", "ORDW", "PK(a,b)"] {
            let r = solve_milp(&unit(id, &inst), &inst, &MilpOptions::default()).unwrap();
            assert_eq!(r.status, MilpStatus::Optimal, "{id}");
            assert!((r.model_objective.unwrap() - 6.0).abs() < 1e-6, "{id}");
            assert_eq!(r.recomputed, Some(Rational::from_integer(6)), "{id}");
            assert_eq!(r.x.as_deref(), Some(&[0u8, 1, 1, 0][..]), "{id}");
            assert!(r.root_bound >= 6.0 - 1e-6);
        }
    }

    #[test]
    fn dw_beta_on_ex3_overshoots() {
        let inst = fixtures::ex3();
        let r = solve_milp(&unit("DW(*,b)", &inst), &inst, &MilpOptions::default()).unwrap();
        assert_eq!(r.status, MilpStatus::Optimal);
        assert!((r.model_objective.unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn fingerprint_checked() {
        let m = unit("GW", &fixtures::ex2());
        assert!(matches!(
            solve_milp(&m, &fixtures::ex3(), &MilpOptions::default()),
            Err(Error::FingerprintMismatch { .. })
        ));
    }

    #[test]
    fn forced_stop_reproduces_recomputation_gap() {
        let inst = fixtures::ex1(1);
        let m = build(&ModelId::basic(Family::DW).or(), &inst, &WeightSet::unit()).unwrap();
        let opts = MilpOptions {
            stop_after_first_incumbent: true,
            mip_start: Some(vec![1, 1]),
            ..Default::default()
        };
        let mut lines = Vec::new();
        let r = solve_milp_observed(&m, &inst, &opts, &mut |p| lines.push(p.to_string())).unwrap();
        assert_eq!(r.status, MilpStatus::FeasibleTimeout);
        assert_eq!(r.model_objective, Some(0.0));
        assert_eq!(r.recomputed, Some(Rational::from_integer(2)));
        assert!(r.best_bound >= 2.0 - 1e-9);
        assert!(lines[0].starts_with("event=incumbent node=0 objective=0 recomputed=2"));

        let full = solve_milp(&m, &inst, &MilpOptions::default()).unwrap();
        assert_eq!(full.status, MilpStatus::Optimal);
        assert_eq!(full.model_objective, Some(2.0));
    }

    #[test]
    fn node_limit_stops() {
        let inst = fixtures::ex2();
        let m = unit("GW", &inst);
        let r = solve_milp(
            &m,
            &inst,
            &MilpOptions {
                node_limit: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(matches!(r.status, MilpStatus::FeasibleTimeout | MilpStatus::Optimal));
        if let Some(z) = r.model_objective {
            assert!(z <= r.best_bound + 1e-9);
        }
    }

    #[test]
    fn deterministic_node_count() {
        let inst = fixtures::ex6b();
        let m = unit("FT", &inst);
        let a = solve_milp(&m, &inst, &MilpOptions::default()).unwrap();
        let b = solve_milp(&m, &inst, &MilpOptions::default()).unwrap();
        assert_eq!(a.nodes, b.nodes);
        assert_eq!(a.incumbent, b.incumbent);
    }

    #[test]
    fn enumeration_precise_vs_restricted() {
        let inst = fixtures::ex1(1);
        let dw = feasible_integral_enumeration(&unit("DW", &inst), &inst, 4).unwrap();
        assert!(dw.iter().all(|p| p.feasible && p.products_forced()));
        let ordw = feasible_integral_enumeration(&unit("ORDW", &inst), &inst, 4).unwrap();
        let p11 = ordw.iter().find(|p| p.x == [1, 1]).unwrap();
        assert_eq!(p11.witness.as_deref(), Some(&[1.0, 1.0, 0.0, 0.0][..]));
        assert!(feasible_integral_enumeration(&unit("DW", &fixtures::ex2()), &fixtures::ex2(), 3).is_err());
    }

    #[test]
    fn pk_two_variable_feasible_set() {
        let inst = QuboInstance::from_integers(&[vec![0, 4], vec![4, 0]], &[-1, 2]).unwrap();
        let pts = feasible_integral_enumeration(&unit("PK", &inst), &inst, 4).unwrap();
        for p in &pts {
            for &(i, j, lo, hi) in &p.y_ranges {
                let prod = (p.x[i] * p.x[j]) as f64;
                assert!((lo - prod).abs() < 1e-9 && (hi - prod).abs() < 1e-9);
            }
        }
    }
}
