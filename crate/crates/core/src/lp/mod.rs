//! Linear programs, the embedded simplex solver and the three placement
//! problems built on top of them.

mod format;
mod problems;
mod simplex;

use std::fmt;

use serde::Serialize;

pub use format::to_lp_format;
pub use problems::{
    build, build_p0, build_p1, build_p2, lower_bound, optimize_mccs, p0_coefficients, placement_variable,
    solve_problem, BoundVariant, PlacementSolution, ProblemKind, P0_ENUMERATION_LIMIT, P1_SET_SIZE_LIMIT,
};
pub use simplex::DenseSimplex;

/// A dense linear constraint row.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coefficients: Vec<f64>,
    pub rhs: f64,
}

/// `minimize c.x` subject to `A_eq x = b_eq`, `A_ub x <= b_ub`, `x >= lower`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub names: Vec<String>,
    pub objective: Vec<f64>,
    pub lower_bounds: Vec<f64>,
    pub equalities: Vec<Constraint>,
    pub inequalities: Vec<Constraint>,
}

impl LinearProgram {
    /// A program over `names.len()` variables, all bounded below by zero.
    pub fn new(names: Vec<String>) -> Self {
        let n = names.len();
        Self { names, objective: vec![0.0; n], lower_bounds: vec![0.0; n], equalities: vec![], inequalities: vec![] }
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn add_eq(&mut self, name: impl Into<String>, coefficients: Vec<f64>, rhs: f64) {
        debug_assert_eq!(coefficients.len(), self.n_vars());
        self.equalities.push(Constraint { name: name.into(), coefficients, rhs });
    }

    pub fn add_le(&mut self, name: impl Into<String>, coefficients: Vec<f64>, rhs: f64) {
        debug_assert_eq!(coefficients.len(), self.n_vars());
        self.inequalities.push(Constraint { name: name.into(), coefficients, rhs });
    }

    /// `a.x >= rhs`, stored as `-a.x <= -rhs`.
    pub fn add_ge(&mut self, name: impl Into<String>, coefficients: Vec<f64>, rhs: f64) {
        let negated = coefficients.into_iter().map(|c| -c).collect();
        self.add_le(name, negated, -rhs);
    }

    pub fn objective_at(&self, point: &[f64]) -> f64 {
        dot(&self.objective, point)
    }

    /// Largest violation of any constraint or bound at `point`.
    pub fn max_residual(&self, point: &[f64]) -> f64 {
        let eq = self.equalities.iter().map(|c| (dot(&c.coefficients, point) - c.rhs).abs());
        let ub = self.inequalities.iter().map(|c| (dot(&c.coefficients, point) - c.rhs).max(0.0));
        let lb = self.lower_bounds.iter().zip(point).map(|(l, x)| (l - x).max(0.0));
        eq.chain(ub).chain(lb).fold(0.0, f64::max)
    }

    pub(crate) fn check_shape(&self) -> Result<(), String> {
        let n = self.n_vars();
        if self.objective.len() != n || self.lower_bounds.len() != n {
            return Err("objective or bounds length differs from the variable count".into());
        }
        if let Some(c) = self.equalities.iter().chain(&self.inequalities).find(|c| c.coefficients.len() != n) {
            return Err(format!("constraint {} has {} coefficients", c.name, c.coefficients.len()));
        }
        let finite = self.objective.iter().chain(&self.lower_bounds).all(|v| v.is_finite())
            && self
                .equalities
                .iter()
                .chain(&self.inequalities)
                .all(|c| c.rhs.is_finite() && c.coefficients.iter().all(|v| v.is_finite()));
        if !finite {
            return Err("non-finite coefficient, bound or right-hand side".into());
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    Malformed,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::IterationLimit => "iteration_limit",
            LpStatus::Malformed => "malformed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; `NaN` unless optimal.
    pub value: f64,
    /// Empty unless optimal.
    pub point: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solver seam; the embedded simplex is the default implementation.
pub trait LpSolver {
    fn solve(&self, lp: &LinearProgram) -> LpSolution;
}

/// Solves with the embedded dense simplex.
pub fn solve(lp: &LinearProgram) -> LpSolution {
    DenseSimplex::default().solve(lp)
}
