//! Dense bounded-variable simplex.
//!
//! Every row gets a slack column, so the working system is `[A | I] z = b`
//! with `z = (x, s)`. The tableau holds `B⁻¹ [A | I]` explicitly; its slack
//! block is `B⁻¹`, which is where the row duals are read from.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{MilpModel, Sense};

pub(crate) const FEAS_TOL: f64 = 1e-9;
pub(crate) const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REINVERT_EVERY: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Immutable problem data shared by every copy of a solver state.
#[derive(Debug)]
struct Problem {
    m: usize,
    nv: usize,
    /// Row-major `m × nv` constraint matrix.
    a: Vec<f64>,
    b: Vec<f64>,
    cost: Vec<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct Simplex {
    p: Arc<Problem>,
    ncol: usize,
    t: Vec<f64>,
    pub(crate) lo: Vec<f64>,
    pub(crate) hi: Vec<f64>,
    pub(crate) x: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<Option<usize>>,
    d: Vec<f64>,
    since_reinvert: usize,
    pub(crate) iterations: usize,
    max_iterations: usize,
}

impl Simplex {
    pub(crate) fn new(model: &MilpModel) -> Self {
        let m = model.num_rows();
        let nv = model.num_vars();
        let ncol = nv + m;
        let mut a = vec![0.0; m * nv];
        let mut b = vec![0.0; m];
        let mut lo = Vec::with_capacity(ncol);
        let mut hi = Vec::with_capacity(ncol);
        for v in &model.variables {
            lo.push(v.lower);
            hi.push(v.upper);
        }
        for (r, c) in model.constraints.iter().enumerate() {
            for &(k, coef) in &c.terms {
                a[r * nv + k] += coef;
            }
            b[r] = c.rhs;
            let (l, h) = match c.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lo.push(l);
            hi.push(h);
        }
        let mut cost = model.objective.clone();
        cost.resize(ncol, 0.0);
        let mut t = vec![0.0; m * ncol];
        for r in 0..m {
            t[r * ncol..r * ncol + nv].copy_from_slice(&a[r * nv..(r + 1) * nv]);
            t[r * ncol + nv + r] = 1.0;
        }
        let mut x = vec![0.0; ncol];
        for j in 0..nv {
            x[j] = initial_value(lo[j], hi[j]);
        }
        for r in 0..m {
            let act: f64 = (0..nv).map(|j| a[r * nv + j] * x[j]).sum();
            x[nv + r] = b[r] - act;
        }
        let basis: Vec<usize> = (nv..ncol).collect();
        let mut row_of = vec![None; ncol];
        for (r, &j) in basis.iter().enumerate() {
            row_of[j] = Some(r);
        }
        let d = cost.clone();
        Self {
            p: Arc::new(Problem { m, nv, a, b, cost }),
            ncol,
            t,
            lo,
            hi,
            x,
            basis,
            row_of,
            d,
            since_reinvert: 0,
            iterations: 0,
            max_iterations: 200 * (m + ncol) + 10_000,
        }
    }

    pub(crate) fn rows(&self) -> usize {
        self.p.m
    }

    pub(crate) fn structural(&self) -> usize {
        self.p.nv
    }

    pub(crate) fn objective(&self) -> f64 {
        (0..self.p.nv).map(|j| self.p.cost[j] * self.x[j]).sum()
    }

    pub(crate) fn primal(&self) -> Vec<f64> {
        self.x[..self.p.nv].to_vec()
    }

    /// `c_Bᵀ B⁻¹`, one value per row.
    pub(crate) fn duals(&self) -> Vec<f64> {
        let (m, nv, ncol) = (self.p.m, self.p.nv, self.ncol);
        let mut y = vec![0.0; m];
        for r in 0..m {
            let cb = self.p.cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[r * ncol + nv..(r + 1) * ncol];
            for (yi, &v) in y.iter_mut().zip(row) {
                *yi += cb * v;
            }
        }
        y
    }

    pub(crate) fn reduced_costs(&self) -> Vec<f64> {
        self.d[..self.p.nv].to_vec()
    }

    pub(crate) fn basis_fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut mix = |v: u64| {
            h ^= v;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        };
        let mut sorted = self.basis.clone();
        sorted.sort_unstable();
        for j in sorted {
            mix(j as u64);
        }
        mix(u64::MAX);
        for j in 0..self.ncol {
            if self.row_of[j].is_none() && self.hi[j] > self.lo[j] && (self.x[j] - self.hi[j]).abs() <= FEAS_TOL {
                mix(j as u64);
            }
        }
        format!("{h:016x}")
    }

    /// Changes the bounds of a structural column. Nonbasic columns are moved
    /// onto the new bounds and the basic values updated.
    pub(crate) fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lo[j] = lo;
        self.hi[j] = hi;
        if self.row_of[j].is_some() {
            return;
        }
        let old = self.x[j];
        let new = if lo == hi || old < lo {
            lo
        } else if old > hi {
            hi
        } else {
            old
        };
        if new != old {
            self.shift_nonbasic(j, new - old);
        }
    }

    fn shift_nonbasic(&mut self, j: usize, delta: f64) {
        let ncol = self.ncol;
        for r in 0..self.p.m {
            let a = self.t[r * ncol + j];
            if a != 0.0 {
                self.x[self.basis[r]] -= a * delta;
            }
        }
        self.x[j] += delta;
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let (m, ncol) = (self.p.m, self.ncol);
        let piv = self.t[r * ncol + q];
        let inv = 1.0 / piv;
        for v in &mut self.t[r * ncol..(r + 1) * ncol] {
            *v *= inv;
        }
        self.t[r * ncol + q] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * ncol);
        let (prow, after) = rest.split_at_mut(ncol);
        let eliminate = |row: &mut [f64]| {
            let f = row[q];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[q] = 0.0;
            }
        };
        before.chunks_mut(ncol).for_each(eliminate);
        after.chunks_mut(ncol).for_each(eliminate);
        let f = self.d[q];
        if f != 0.0 {
            for (dv, &pv) in self.d.iter_mut().zip(prow.iter()) {
                *dv -= f * pv;
            }
            self.d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.row_of[leaving] = None;
        self.row_of[q] = Some(r);
        self.basis[r] = q;
        self.since_reinvert += 1;
        debug_assert!(m == self.basis.len());
    }

    /// Rebuilds `B⁻¹ [A | I]`, the basic values and the reduced costs from
    /// the original data.
    pub(crate) fn reinvert(&mut self) -> Result<()> {
        let (m, nv, ncol) = (self.p.m, self.p.nv, self.ncol);
        let mut t = vec![0.0; m * ncol];
        for r in 0..m {
            t[r * ncol..r * ncol + nv].copy_from_slice(&self.p.a[r * nv..(r + 1) * nv]);
            t[r * ncol + nv + r] = 1.0;
        }
        let mut rhs = self.p.b.clone();
        for k in 0..m {
            let col = self.basis[k];
            let mut best = k;
            let mut best_abs = 0.0;
            for r in k..m {
                let v = t[r * ncol + col].abs();
                if v > best_abs {
                    best_abs = v;
                    best = r;
                }
            }
            if best_abs < 1e-11 {
                return Err(Error::SolverStall(self.iterations));
            }
            if best != k {
                for c in 0..ncol {
                    t.swap(k * ncol + c, best * ncol + c);
                }
                rhs.swap(k, best);
            }
            let inv = 1.0 / t[k * ncol + col];
            for v in &mut t[k * ncol..(k + 1) * ncol] {
                *v *= inv;
            }
            rhs[k] *= inv;
            t[k * ncol + col] = 1.0;
            for r in 0..m {
                if r == k {
                    continue;
                }
                let f = t[r * ncol + col];
                if f == 0.0 {
                    continue;
                }
                for c in 0..ncol {
                    t[r * ncol + c] -= f * t[k * ncol + c];
                }
                t[r * ncol + col] = 0.0;
                rhs[r] -= f * rhs[k];
            }
        }
        self.t = t;
        for r in 0..m {
            let mut v = rhs[r];
            for j in 0..ncol {
                if self.row_of[j].is_none() && self.x[j] != 0.0 {
                    v -= self.t[r * ncol + j] * self.x[j];
                }
            }
            self.x[self.basis[r]] = v;
        }
        self.recompute_reduced_costs();
        self.since_reinvert = 0;
        Ok(())
    }

    fn recompute_reduced_costs(&mut self) {
        let (m, ncol) = (self.p.m, self.ncol);
        self.d = self.p.cost.clone();
        for r in 0..m {
            let cb = self.p.cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for j in 0..ncol {
                self.d[j] -= cb * self.t[r * ncol + j];
            }
        }
        for &j in &self.basis {
            self.d[j] = 0.0;
        }
    }

    fn can_increase(&self, j: usize) -> bool {
        self.x[j] < self.hi[j] - FEAS_TOL
    }

    fn can_decrease(&self, j: usize) -> bool {
        self.x[j] > self.lo[j] + FEAS_TOL
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let tol = FEAS_TOL * (1.0 + self.x[j].abs());
        if self.x[j] < self.lo[j] - tol {
            self.lo[j] - self.x[j]
        } else if self.x[j] > self.hi[j] + tol {
            self.x[j] - self.hi[j]
        } else {
            0.0
        }
    }

    fn primal_feasible(&self) -> bool {
        self.basis.iter().all(|&j| self.infeasibility(j) == 0.0)
    }

    fn dual_feasible(&self) -> bool {
        (0..self.ncol).all(|j| {
            if self.row_of[j].is_some() || self.lo[j] == self.hi[j] {
                return true;
            }
            let d = self.d[j];
            (d <= OPT_TOL || !self.can_increase(j)) && (d >= -OPT_TOL || !self.can_decrease(j))
        })
    }

    fn tick(&mut self) -> Result<()> {
        self.iterations += 1;
        if self.iterations > self.max_iterations {
            return Err(Error::SolverStall(self.iterations));
        }
        if self.since_reinvert >= REINVERT_EVERY {
            self.reinvert()?;
        }
        Ok(())
    }

    /// Chooses an entering column and direction for the given pricing row.
    fn price(&self, d: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.ncol {
            if self.row_of[j].is_some() || self.lo[j] == self.hi[j] {
                continue;
            }
            let dir = if d[j] > OPT_TOL && self.can_increase(j) {
                1.0
            } else if d[j] < -OPT_TOL && self.can_decrease(j) {
                -1.0
            } else {
                continue;
            };
            let score = d[j].abs();
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Runs the primal simplex. Phase 1 maximizes minus the total bound
    /// violation of the basic columns; phase 2 maximizes the objective.
    pub(crate) fn solve_primal(&mut self) -> Result<Outcome> {
        if !self.primal_feasible() && !self.run_primal(true)? {
            return Ok(Outcome::Infeasible);
        }
        loop {
            if !self.run_primal(false)? {
                return Ok(Outcome::Unbounded);
            }
            self.reinvert()?;
            if !self.primal_feasible() {
                if !self.run_primal(true)? {
                    return Ok(Outcome::Infeasible);
                }
                continue;
            }
            if self.dual_feasible() {
                return Ok(Outcome::Optimal);
            }
        }
    }

    /// One primal phase. Returns `false` when phase 1 proves infeasibility
    /// or phase 2 finds an unbounded ray.
    fn run_primal(&mut self, phase1: bool) -> Result<bool> {
        let (m, ncol) = (self.p.m, self.ncol);
        let mut stalled = 0usize;
        let mut bland = false;
        let stall_limit = 3 * (m + ncol);
        let mut d1 = vec![0.0; ncol];
        loop {
            self.tick()?;
            if phase1 {
                let mut any = false;
                d1.iter_mut().for_each(|v| *v = 0.0);
                for r in 0..m {
                    let j = self.basis[r];
                    let w = if self.infeasibility(j) == 0.0 {
                        continue;
                    } else if self.x[j] < self.lo[j] {
                        1.0
                    } else {
                        -1.0
                    };
                    any = true;
                    for (dv, &tv) in d1.iter_mut().zip(&self.t[r * ncol..(r + 1) * ncol]) {
                        *dv -= w * tv;
                    }
                }
                if !any {
                    return Ok(true);
                }
                for &j in &self.basis {
                    d1[j] = 0.0;
                }
            }
            let entering = if phase1 { self.price(&d1, bland) } else { self.price(&self.d, bland) };
            let Some((q, dir)) = entering else {
                return Ok(!phase1);
            };
            let gain = if phase1 { d1[q].abs() } else { self.d[q].abs() };

            let mut leave: Option<(usize, f64, f64)> = None;
            for r in 0..m {
                let alpha = dir * self.t[r * ncol + q];
                if alpha.abs() < PIVOT_TOL {
                    continue;
                }
                let j = self.basis[r];
                let xb = self.x[j];
                let (limit, bound) = if phase1 && self.infeasibility(j) > 0.0 {
                    if xb < self.lo[j] && alpha < 0.0 {
                        ((self.lo[j] - xb) / -alpha, self.lo[j])
                    } else if xb > self.hi[j] && alpha > 0.0 {
                        ((xb - self.hi[j]) / alpha, self.hi[j])
                    } else {
                        continue;
                    }
                } else if alpha > 0.0 {
                    if !self.lo[j].is_finite() {
                        continue;
                    }
                    (((xb - self.lo[j]) / alpha).max(0.0), self.lo[j])
                } else {
                    if !self.hi[j].is_finite() {
                        continue;
                    }
                    (((self.hi[j] - xb) / -alpha).max(0.0), self.hi[j])
                };
                let pick = match leave {
                    None => true,
                    Some((r0, l0, _)) => {
                        if limit < l0 - 1e-12 {
                            true
                        } else if limit <= l0 + 1e-12 {
                            if bland {
                                j < self.basis[r0]
                            } else {
                                alpha.abs() > self.t[r0 * ncol + q].abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if pick {
                    leave = Some((r, limit, bound));
                }
            }
            let range = self.hi[q] - self.lo[q];
            let step = match leave {
                Some((r, limit, bound)) if limit <= range => {
                    let leaving = self.basis[r];
                    self.shift_nonbasic(q, dir * limit);
                    self.x[leaving] = bound;
                    self.pivot(r, q);
                    limit
                }
                _ if range.is_finite() => {
                    let target = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                    let delta = target - self.x[q];
                    self.shift_nonbasic(q, delta);
                    self.x[q] = target;
                    range
                }
                _ if phase1 => return Err(Error::SolverStall(self.iterations)),
                _ => return Ok(false),
            };
            if gain * step <= 1e-12 {
                stalled += 1;
                if stalled > stall_limit {
                    bland = true;
                }
            } else {
                stalled = 0;
            }
        }
    }

    /// Dual simplex from a dual feasible basis. Falls back to the primal
    /// method if dual feasibility is lost.
    pub(crate) fn solve_dual(&mut self) -> Result<Outcome> {
        if !self.dual_feasible() {
            return self.solve_primal();
        }
        let (m, ncol) = (self.p.m, self.ncol);
        let mut stalled = 0usize;
        let mut bland = false;
        let stall_limit = 3 * (m + ncol);
        loop {
            self.tick()?;
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let viol = self.infeasibility(self.basis[r]);
                if viol == 0.0 {
                    continue;
                }
                let pick = match leave {
                    None => true,
                    Some((r0, v0)) => {
                        if bland {
                            self.basis[r] < self.basis[r0]
                        } else {
                            viol > v0
                        }
                    }
                };
                if pick {
                    leave = Some((r, viol));
                }
            }
            let Some((r, _)) = leave else {
                return self.solve_primal();
            };
            let jl = self.basis[r];
            let below = self.x[jl] < self.lo[jl];
            let target = if below { self.lo[jl] } else { self.hi[jl] };
            let mut enter: Option<(usize, f64)> = None;
            for j in 0..ncol {
                if self.row_of[j].is_some() || self.lo[j] == self.hi[j] {
                    continue;
                }
                let a = self.t[r * ncol + j];
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let up = self.can_increase(j);
                let down = self.can_decrease(j);
                let ok = if below {
                    (up && a < 0.0) || (down && a > 0.0)
                } else {
                    (up && a > 0.0) || (down && a < 0.0)
                };
                if !ok {
                    continue;
                }
                let ratio = self.d[j].abs() / a.abs();
                let pick = match enter {
                    None => true,
                    Some((j0, r0)) => {
                        if ratio < r0 - 1e-12 {
                            true
                        } else if ratio <= r0 + 1e-12 {
                            if bland {
                                j < j0
                            } else {
                                a.abs() > self.t[r * ncol + j0].abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if pick {
                    enter = Some((j, ratio));
                }
            }
            let Some((q, ratio)) = enter else {
                return Ok(Outcome::Infeasible);
            };
            let a = self.t[r * ncol + q];
            let delta = (self.x[jl] - target) / a;
            self.shift_nonbasic(q, delta);
            self.x[jl] = target;
            self.pivot(r, q);
            if ratio * delta.abs() <= 1e-12 {
                stalled += 1;
                if stalled > stall_limit {
                    bland = true;
                }
            } else {
                stalled = 0;
            }
        }
    }

    /// Largest row residual `|A x + s − b|` and bound violation.
    #[cfg(test)]
    pub(crate) fn residual(&self) -> f64 {
        let (m, nv) = (self.p.m, self.p.nv);
        let mut worst: f64 = 0.0;
        for r in 0..m {
            let act: f64 = (0..nv).map(|j| self.p.a[r * nv + j] * self.x[j]).sum::<f64>() + self.x[nv + r];
            worst = worst.max((act - self.p.b[r]).abs());
        }
        for j in 0..self.ncol {
            worst = worst.max(self.lo[j] - self.x[j]).max(self.x[j] - self.hi[j]);
        }
        worst
    }
}

fn initial_value(lo: f64, hi: f64) -> f64 {
    if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulations::{build, Family, ModelId, WeightSet};
    use crate::instances::fixtures;

    #[test]
    fn primal_solution_is_feasible() {
        let m = build(&ModelId::basic(Family::FT), &fixtures::ex2(), &WeightSet::unit()).unwrap();
        let mut s = Simplex::new(&m);
        assert_eq!(s.solve_primal().unwrap(), Outcome::Optimal);
        assert!(s.residual() < 1e-9);
    }

    #[test]
    fn dual_warm_start_matches_cold_solve() {
        let m = build(&ModelId::basic(Family::GW), &fixtures::ex2(), &WeightSet::unit()).unwrap();
        let mut warm = Simplex::new(&m);
        warm.solve_primal().unwrap();
        warm.set_bounds(0, 0.0, 0.0);
        assert_eq!(warm.solve_dual().unwrap(), Outcome::Optimal);
        assert!(warm.residual() < 1e-9);

        let mut cold = Simplex::new(&m);
        cold.set_bounds(0, 0.0, 0.0);
        cold.solve_primal().unwrap();
        assert!((warm.objective() - cold.objective()).abs() < 1e-9);
    }
}
