//! Bounded-variable primal simplex.
//!
//! Rows are turned into equalities `Ax − s = 0` with one logical `s_i` per
//! row carrying the row bounds, so the all-logical basis is always
//! available. Phase 1 minimizes the sum of basic bound violations with
//! costs recomputed every iteration; phase 2 minimizes the scaled negated
//! objective.

use log::trace;

use super::lu::{factorize, Eta, Lu};
use super::{LinearProgram, LpSolution, LpStatus, Sense, FEASIBILITY_TOL, OPTIMALITY_TOL};
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 80;
const MAX_REVERIFY: usize = 8;

/// A column-major copy of a program that can be re-solved under changing
/// variable bounds.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    n: usize,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    scale: f64,
    row_lo: Vec<f64>,
    row_hi: Vec<f64>,
}

/// Basis snapshot used to warm-start a related solve.
#[derive(Debug, Clone)]
pub(crate) struct Basis {
    basic: Vec<usize>,
    at_upper: Vec<bool>,
}

impl Prepared {
    pub(crate) fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.num_constraints();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut row_lo = Vec::with_capacity(m);
        let mut row_hi = Vec::with_capacity(m);
        for (i, row) in lp.constraints.iter().enumerate() {
            for &(j, v) in &row.coeffs {
                match cols[j].last_mut() {
                    Some(last) if last.0 == i => last.1 += v,
                    _ => cols[j].push((i, v)),
                }
            }
            let (lo, hi) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, row.rhs),
                Sense::Ge => (row.rhs, f64::INFINITY),
                Sense::Eq => (row.rhs, row.rhs),
            };
            row_lo.push(lo);
            row_hi.push(hi);
        }
        for col in &mut cols {
            col.retain(|e| e.1 != 0.0);
        }
        let cmax = lp.objective.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        Prepared {
            n,
            m,
            cols,
            cost: lp.objective.clone(),
            scale: if cmax > 0.0 { 1.0 / cmax } else { 1.0 },
            row_lo,
            row_hi,
        }
    }

    /// Solves with the given structural bounds, optionally starting from a
    /// previous basis.
    pub(crate) fn solve(
        &self,
        lower: &[f64],
        upper: &[f64],
        warm: Option<&Basis>,
    ) -> Result<(LpSolution, Basis)> {
        let mut s = State::new(self, lower, upper, warm)?;
        let status = s.run()?;
        Ok(s.finish(status))
    }
}

struct State<'a> {
    p: &'a Prepared,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    basic: Vec<usize>,
    pos: Vec<usize>,
    lu: Option<Lu>,
    etas: Vec<Eta>,
    work: Vec<f64>,
    iterations: usize,
}

impl<'a> State<'a> {
    fn new(p: &'a Prepared, lower: &[f64], upper: &[f64], warm: Option<&Basis>) -> Result<Self> {
        let (n, m) = (p.n, p.m);
        if lower.len() != n || upper.len() != n {
            return Err(Error::Structure(
                "bound vectors do not match the variable count".into(),
            ));
        }
        let mut lo = lower.to_vec();
        lo.extend_from_slice(&p.row_lo);
        let mut hi = upper.to_vec();
        hi.extend_from_slice(&p.row_hi);
        let mut cost: Vec<f64> = p.cost.iter().map(|c| -c * p.scale).collect();
        cost.resize(n + m, 0.0);

        let (basic, at_upper) = match warm {
            Some(b) if b.basic.len() == m && b.at_upper.len() == n + m => {
                (b.basic.clone(), b.at_upper.clone())
            }
            _ => ((n..n + m).collect(), vec![false; n + m]),
        };
        let mut pos = vec![NONE; n + m];
        for (i, &j) in basic.iter().enumerate() {
            pos[j] = i;
        }
        let mut x = vec![0.0; n + m];
        for j in 0..n + m {
            if pos[j] == NONE {
                x[j] = rest_value(lo[j], hi[j], at_upper[j]);
            }
        }
        let mut s = State {
            p,
            lo,
            hi,
            cost,
            x,
            basic,
            pos,
            lu: None,
            etas: Vec::new(),
            work: vec![0.0; m],
            iterations: 0,
        };
        s.refactor()?;
        Ok(s)
    }

    fn column(&self, j: usize) -> ColumnIter<'_> {
        if j < self.p.n {
            ColumnIter::Structural(self.p.cols[j].iter())
        } else {
            ColumnIter::Logical(Some(j - self.p.n))
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.p.m;
        for _attempt in 0..=m {
            let cols: Vec<Vec<(usize, f64)>> = self
                .basic
                .iter()
                .map(|&j| self.column(j).collect())
                .collect();
            match factorize(m, &cols) {
                Ok(lu) => {
                    self.lu = Some(lu);
                    self.etas.clear();
                    self.compute_basics();
                    return Ok(());
                }
                Err(sing) => {
                    trace!("singular basis, replacing {} columns", sing.positions.len());
                    for (&k, &r) in sing.positions.iter().zip(&sing.rows) {
                        let out = self.basic[k];
                        let logical = self.p.n + r;
                        if self.pos[logical] != NONE {
                            continue;
                        }
                        self.pos[out] = NONE;
                        self.x[out] = rest_value(self.lo[out], self.hi[out], false);
                        self.basic[k] = logical;
                        self.pos[logical] = k;
                    }
                }
            }
        }
        Err(Error::Numerical("basis repair did not converge".into()))
    }

    fn ftran(&mut self, v: &mut [f64]) {
        self.lu
            .as_ref()
            .expect("factorized")
            .ftran(v, &mut self.work);
        for e in &self.etas {
            e.apply_ftran(v);
        }
    }

    fn btran(&mut self, v: &mut [f64]) {
        for e in self.etas.iter().rev() {
            e.apply_btran(v);
        }
        self.lu
            .as_ref()
            .expect("factorized")
            .btran(v, &mut self.work);
    }

    /// Solves `B x_B = −N x_N`.
    fn compute_basics(&mut self) {
        let m = self.p.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.p.n + m {
            if self.pos[j] == NONE && self.x[j] != 0.0 {
                let xj = self.x[j];
                for (i, v) in self.column(j) {
                    rhs[i] -= v * xj;
                }
            }
        }
        self.ftran(&mut rhs);
        for (k, &j) in self.basic.iter().enumerate() {
            self.x[j] = rhs[k];
        }
    }

    /// Phase-1 cost of every basic position, or `None` when the basis is
    /// primal feasible.
    fn phase_one_costs(&self) -> Option<Vec<f64>> {
        let mut any = false;
        let c: Vec<f64> = self
            .basic
            .iter()
            .map(|&j| {
                if self.x[j] < self.lo[j] - FEASIBILITY_TOL {
                    any = true;
                    -1.0
                } else if self.x[j] > self.hi[j] + FEASIBILITY_TOL {
                    any = true;
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        any.then_some(c)
    }

    fn duals(&mut self, basic_cost: Vec<f64>) -> Vec<f64> {
        let mut pi = basic_cost;
        self.btran(&mut pi);
        pi
    }

    fn reduced_cost(&self, j: usize, pi: &[f64], phase_one: bool) -> f64 {
        let c = if phase_one { 0.0 } else { self.cost[j] };
        c - self.column(j).map(|(i, v)| pi[i] * v).sum::<f64>()
    }

    /// Entering variable and direction (+1 increase, −1 decrease).
    fn price(&self, pi: &[f64], phase_one: bool, bland: bool) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.p.n + self.p.m {
            if self.pos[j] != NONE || self.lo[j] == self.hi[j] {
                continue;
            }
            let d = self.reduced_cost(j, pi, phase_one);
            let dir = if d < -OPTIMALITY_TOL && self.x[j] < self.hi[j] {
                1.0
            } else if d > OPTIMALITY_TOL && self.x[j] > self.lo[j] {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir, d));
            }
            if best.is_none_or(|(_, _, bd)| d.abs() > bd.abs()) {
                best = Some((j, dir, d));
            }
        }
        best
    }

    fn run(&mut self) -> Result<LpStatus> {
        let (n, m) = (self.p.n, self.p.m);
        let stall_limit = 5 * (m + n);
        let max_iter = 50 * (m + n) + 10_000;
        let mut stalled = 0usize;
        let mut reverify = 0usize;
        let mut alpha = vec![0.0; m];

        loop {
            if self.iterations >= max_iter {
                return Err(Error::Numerical(format!(
                    "simplex iteration limit {max_iter} reached ({m} rows, {n} columns)"
                )));
            }
            let phase1 = self.phase_one_costs();
            let phase_one = phase1.is_some();
            let basic_cost =
                phase1.unwrap_or_else(|| self.basic.iter().map(|&j| self.cost[j]).collect());
            let pi = self.duals(basic_cost);
            let bland = stalled > stall_limit;
            let Some((q, dir, d_q)) = self.price(&pi, phase_one, bland) else {
                // confirm on a fresh factorization before concluding
                if !self.etas.is_empty() && reverify < MAX_REVERIFY {
                    reverify += 1;
                    self.refactor()?;
                    continue;
                }
                return Ok(if phase_one {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                });
            };

            alpha.iter_mut().for_each(|a| *a = 0.0);
            for (i, v) in self.column(q) {
                alpha[i] = v;
            }
            self.ftran(&mut alpha);

            let step = self.ratio_test(&alpha, q, dir, bland);
            self.iterations += 1;
            let (theta, leave) = match step {
                Step::Unbounded => {
                    if phase_one {
                        self.refactor()?;
                        reverify += 1;
                        if reverify > MAX_REVERIFY {
                            return Err(Error::Numerical("unbounded phase-1 ray".into()));
                        }
                        continue;
                    }
                    return Ok(LpStatus::Unbounded);
                }
                Step::Flip(theta) => (theta, None),
                Step::Pivot(theta, k, bound) => (theta, Some((k, bound))),
            };

            if theta * d_q.abs() <= 1e-12 {
                stalled += 1;
            } else {
                stalled = 0;
            }

            self.x[q] += dir * theta;
            if theta != 0.0 {
                for (k, &j) in self.basic.iter().enumerate() {
                    self.x[j] -= dir * theta * alpha[k];
                }
            }
            match leave {
                None => {
                    // snap the flipped variable onto its bound exactly
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Some((k, bound)) => {
                    let out = self.basic[k];
                    self.x[out] = bound;
                    self.pos[out] = NONE;
                    self.basic[k] = q;
                    self.pos[q] = k;
                    self.etas.push(Eta::new(k, &alpha));
                    if self.etas.len() >= REFACTOR_EVERY {
                        self.refactor()?;
                    }
                }
            }
        }
    }

    /// Two-pass Harris ratio test with bound flips.
    fn ratio_test(&self, alpha: &[f64], q: usize, dir: f64, bland: bool) -> Step {
        let mut relaxed = f64::INFINITY;
        let target = |k: usize, rate: f64| -> Option<f64> {
            let j = self.basic[k];
            let (x, lo, hi) = (self.x[j], self.lo[j], self.hi[j]);
            if rate < 0.0 {
                if x > hi + FEASIBILITY_TOL {
                    Some(hi)
                } else if x < lo - FEASIBILITY_TOL {
                    None
                } else {
                    lo.is_finite().then_some(lo)
                }
            } else if x < lo - FEASIBILITY_TOL {
                Some(lo)
            } else if x > hi + FEASIBILITY_TOL {
                None
            } else {
                hi.is_finite().then_some(hi)
            }
        };
        for (k, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let rate = -dir * a;
            if let Some(b) = target(k, rate) {
                let r = ((b - self.x[self.basic[k]]).abs() + FEASIBILITY_TOL) / rate.abs();
                relaxed = relaxed.min(r);
            }
        }
        let range = self.hi[q] - self.lo[q];
        if range <= relaxed {
            return if range.is_finite() {
                Step::Flip(range)
            } else {
                Step::Unbounded
            };
        }

        let mut best: Option<(usize, f64, f64, f64)> = None;
        for (k, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let rate = -dir * a;
            let Some(b) = target(k, rate) else { continue };
            let exact = ((b - self.x[self.basic[k]]) / rate).max(0.0);
            if exact > relaxed {
                continue;
            }
            let better = match best {
                None => true,
                Some((bk, bt, ba, _)) => {
                    if bland {
                        exact < bt || (exact == bt && self.basic[k] < self.basic[bk])
                    } else {
                        a.abs() > ba || (a.abs() == ba && self.basic[k] < self.basic[bk])
                    }
                }
            };
            if better {
                best = Some((k, exact, a.abs(), b));
            }
        }
        match best {
            Some((k, theta, _, b)) => Step::Pivot(theta, k, b),
            None => Step::Unbounded,
        }
    }

    fn finish(mut self, status: LpStatus) -> (LpSolution, Basis) {
        let n = self.p.n;
        let mut y = Vec::new();
        if status == LpStatus::Optimal {
            let basic_cost = self.basic.iter().map(|&j| self.cost[j]).collect();
            let pi = self.duals(basic_cost);
            y = pi.iter().map(|p| -p / self.p.scale).collect();
        }
        let mut x: Vec<f64> = self.x[..n].to_vec();
        if status == LpStatus::Optimal {
            for (j, v) in x.iter_mut().enumerate() {
                *v = v.clamp(self.lo[j], self.hi[j]);
            }
        }
        let objective = self.p.cost.iter().zip(&x).map(|(c, x)| c * x).sum();
        let at_upper = (0..self.x.len())
            .map(|j| self.pos[j] == NONE && self.hi[j].is_finite() && self.x[j] == self.hi[j])
            .collect();
        let basis = Basis {
            basic: self.basic.clone(),
            at_upper,
        };
        (
            LpSolution {
                status,
                x,
                y,
                objective,
                iterations: self.iterations,
            },
            basis,
        )
    }
}

enum Step {
    Unbounded,
    Flip(f64),
    Pivot(f64, usize, f64),
}

enum ColumnIter<'a> {
    Structural(std::slice::Iter<'a, (usize, f64)>),
    Logical(Option<usize>),
}

impl Iterator for ColumnIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColumnIter::Structural(it) => it.next().copied(),
            ColumnIter::Logical(row) => row.take().map(|i| (i, -1.0)),
        }
    }
}

fn rest_value(lo: f64, hi: f64, prefer_upper: bool) -> f64 {
    if prefer_upper && hi.is_finite() {
        hi
    } else if lo.is_finite() {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    }
}
