//! Linear programming: a bounded-variable revised simplex over a sparse LU
//! factorization of the basis.
//!
//! Problems are stated as maximizations:
//!
//! ```text
//! max cᵀx  s.t.  a_iᵀx {≤,=,≥} b_i,  lo ≤ x ≤ hi
//! ```
//!
//! Duals follow the Lagrangian `cᵀx − yᵀ(Ax − b)`: `y_i ≥ 0` on `≤` rows,
//! `y_i ≤ 0` on `≥` rows, free on equalities.

mod dump;
mod lu;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dump::{parse_dump, write_dump};
pub(crate) use simplex::{Basis, Prepared};

/// Feasibility tolerance on bounds and rows.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Reduced-cost tolerance on the scaled objective.
pub const OPTIMALITY_TOL: f64 = 1e-9;
/// Residual bound guaranteed for reported optimal solutions.
pub const RESIDUAL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    /// Adds a row and returns its index.
    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self.constraints.len() - 1
    }

    /// Builds a program from dense rows.
    pub fn from_dense(
        objective: Vec<f64>,
        rows: &[Vec<f64>],
        senses: &[Sense],
        rhs: &[f64],
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Self {
        let constraints = rows
            .iter()
            .zip(senses)
            .zip(rhs)
            .map(|((row, &sense), &rhs)| Constraint {
                coeffs: row
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .collect(),
                sense,
                rhs,
            })
            .collect();
        LinearProgram {
            objective,
            lower,
            upper,
            constraints,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Structure(format!(
                "{n} costs but {} lower and {} upper bounds",
                self.lower.len(),
                self.upper.len()
            )));
        }
        for (j, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo.is_nan()
                || hi.is_nan()
                || lo > hi
                || lo == f64::INFINITY
                || hi == f64::NEG_INFINITY
            {
                return Err(Error::Structure(format!(
                    "variable {j} has bounds [{lo}, {hi}]"
                )));
            }
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(Error::Structure(format!(
                "cost of variable {j} is not finite"
            )));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::Structure(format!("rhs of row {i} is not finite")));
            }
            for &(j, v) in &row.coeffs {
                if j >= n {
                    return Err(Error::Structure(format!(
                        "row {i} references variable {j} of {n}"
                    )));
                }
                if !v.is_finite() {
                    return Err(Error::Structure(format!(
                        "row {i} has a non-finite coefficient"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    pub fn row_activity(&self, row: usize, x: &[f64]) -> f64 {
        self.constraints[row]
            .coeffs
            .iter()
            .map(|&(j, v)| v * x[j])
            .sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.num_vars() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for (i, row) in self.constraints.iter().enumerate() {
            let a = self.row_activity(i, x);
            let r = match row.sense {
                Sense::Le => a - row.rhs,
                Sense::Ge => row.rhs - a,
                Sense::Eq => (a - row.rhs).abs(),
            };
            worst = worst.max(r);
        }
        worst
    }

    /// Reduced costs `c − Aᵀy`.
    pub fn reduced_costs(&self, y: &[f64]) -> Vec<f64> {
        let mut d = self.objective.clone();
        for (row, &yi) in self.constraints.iter().zip(y) {
            if yi != 0.0 {
                for &(j, v) in &row.coeffs {
                    d[j] -= v * yi;
                }
            }
        }
        d
    }

    /// Lagrangian dual bound `bᵀy + Σ_j max_{lo≤x≤hi} d_j x_j`; infinite
    /// when `y` does not certify a finite bound.
    pub fn dual_objective(&self, y: &[f64]) -> f64 {
        self.dual_bound(y, None)
    }

    /// Like [`dual_objective`](Self::dual_objective), but reduced costs
    /// within the optimality tolerance on an infinite bound are priced at
    /// `x` instead of the bound.
    fn dual_bound(&self, y: &[f64], x: Option<&[f64]>) -> f64 {
        let cmax = self.objective.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let mut v: f64 = self
            .constraints
            .iter()
            .zip(y)
            .map(|(r, yi)| r.rhs * yi)
            .sum();
        for (j, d) in self.reduced_costs(y).into_iter().enumerate() {
            let bound = if d > 0.0 {
                self.upper[j]
            } else if d < 0.0 {
                self.lower[j]
            } else {
                continue;
            };
            v += match x {
                Some(x) if bound.is_infinite() && d.abs() <= OPTIMALITY_TOL * cmax => d * x[j],
                _ => d * bound,
            };
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Row duals; empty unless optimal.
    pub y: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let prepared = Prepared::new(lp);
    let (sol, _) = prepared.solve(&lp.lower, &lp.upper, None)?;
    Ok(sol)
}

/// `|cᵀx − dual bound|` at an optimal solution.
pub fn duality_gap(lp: &LinearProgram, sol: &LpSolution) -> Result<f64> {
    if sol.status != LpStatus::Optimal {
        return Err(Error::State(format!(
            "duality gap needs an optimal solution, status is {:?}",
            sol.status
        )));
    }
    Ok((lp.objective_value(&sol.x) - lp.dual_bound(&sol.y, Some(&sol.x))).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn box_example() {
        let lp = LinearProgram::from_dense(
            vec![1.0, 1.0],
            &[vec![1.0, 0.0], vec![0.0, 1.0]],
            &[Sense::Le, Sense::Le],
            &[1.0, 1.0],
            vec![0.0, 0.0],
            vec![INF, INF],
        );
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-12);
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
        assert!(duality_gap(&lp, &s).unwrap() < 1e-9);
        assert!((s.y[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_example() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, -INF, INF);
        lp.add_constraint(vec![(x, 1.0)], Sense::Ge, 2.0);
        lp.add_constraint(vec![(x, 1.0)], Sense::Le, 1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
        assert!(matches!(duality_gap(&lp, &s), Err(Error::State(_))));
    }

    #[test]
    fn unbounded_example() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, INF);
        lp.add_constraint(vec![(x, 1.0)], Sense::Ge, 0.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn structure_errors() {
        let mut lp = LinearProgram::new();
        lp.add_var(1.0, 0.0, 1.0);
        lp.add_constraint(vec![(3, 1.0)], Sense::Le, 1.0);
        assert!(matches!(solve_lp(&lp), Err(Error::Structure(_))));
        let mut lp = LinearProgram::new();
        lp.add_var(1.0, 2.0, 1.0);
        assert!(matches!(solve_lp(&lp), Err(Error::Structure(_))));
        let lp = LinearProgram {
            objective: vec![1.0],
            lower: vec![],
            upper: vec![1.0],
            constraints: vec![],
        };
        assert!(matches!(solve_lp(&lp), Err(Error::Structure(_))));
    }

    #[test]
    fn equality_and_free_variables() {
        // max x + 2y  s.t. x + y = 3, x - y >= -1, y free, x in [0, 10]
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, 0.0, 10.0);
        let y = lp.add_var(2.0, -INF, INF);
        lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Sense::Eq, 3.0);
        lp.add_constraint(vec![(x, 1.0), (y, -1.0)], Sense::Ge, -1.0);
        let s = solve_lp(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[x] - 1.0).abs() < 1e-9);
        assert!((s.x[y] - 2.0).abs() < 1e-9);
        assert!((s.objective - 5.0).abs() < 1e-9);
        assert!(duality_gap(&lp, &s).unwrap() < 1e-9);
    }

    #[test]
    fn perturbed_primal_widens_gap() {
        let lp = LinearProgram::from_dense(
            vec![3.0, 2.0],
            &[vec![1.0, 1.0], vec![1.0, 3.0]],
            &[Sense::Le, Sense::Le],
            &[4.0, 6.0],
            vec![0.0, 0.0],
            vec![INF, INF],
        );
        let s = solve_lp(&lp).unwrap();
        assert!(duality_gap(&lp, &s).unwrap() < 1e-9);
        for delta in [0.1, 0.2, 0.4] {
            let mut p = s.clone();
            p.x[0] -= delta;
            let g = duality_gap(&lp, &p).unwrap();
            assert!((g - 3.0 * delta).abs() < 1e-9, "{g}");
        }
    }
}
