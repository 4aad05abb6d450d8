//! Dense two-phase tableau simplex.
//!
//! Entering column: most negative reduced cost, lowest index on ties. After a
//! run of degenerate pivots the solver switches to Bland's rule (lowest
//! eligible index) until progress resumes. Leaving row: minimum ratio, ties
//! broken by the lowest basic variable index.

use super::{LinearProgram, LpSolution, LpSolver, LpStatus};

const DEGENERATE_STREAK_FOR_BLAND: usize = 20;

#[derive(Debug, Clone)]
pub struct DenseSimplex {
    pub pivot_tolerance: f64,
    pub feasibility_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        Self { pivot_tolerance: 1e-9, feasibility_tolerance: 1e-9, max_iterations: 100_000 }
    }
}

struct Tableau {
    n_rows: usize,
    width: usize, // columns plus the rhs column
    data: Vec<f64>,
    /// Reduced costs; the last entry is minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    fn rhs(&self, row: usize) -> f64 {
        self.data[row * self.width + self.width - 1]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(row, col);
        for v in &mut self.data[row * w..(row + 1) * w] {
            *v *= inv;
        }
        self.data[row * w + col] = 1.0;
        let pivot_row = self.data[row * w..(row + 1) * w].to_vec();
        for r in 0..self.n_rows {
            if r == row {
                continue;
            }
            let factor = self.data[r * w + col];
            if factor != 0.0 {
                for (v, p) in self.data[r * w..(r + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                self.data[r * w + col] = 0.0;
            }
        }
        let factor = self.cost[col];
        if factor != 0.0 {
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            self.cost[col] = 0.0;
        }
        self.basis[row] = col;
    }

    fn set_costs(&mut self, costs: &[f64]) {
        let w = self.width;
        self.cost = costs.to_vec();
        self.cost.push(0.0);
        for r in 0..self.n_rows {
            let cb = costs[self.basis[r]];
            if cb != 0.0 {
                for (v, t) in self.cost.iter_mut().zip(&self.data[r * w..(r + 1) * w]) {
                    *v -= cb * t;
                }
            }
        }
    }

    fn objective(&self) -> f64 {
        -self.cost[self.width - 1]
    }
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl DenseSimplex {
    fn iterate(&self, t: &mut Tableau, eligible: usize, iterations: &mut usize) -> Outcome {
        let tol = self.pivot_tolerance;
        let mut degenerate_streak = 0;
        loop {
            if *iterations >= self.max_iterations {
                return Outcome::IterationLimit;
            }
            let bland = degenerate_streak >= DEGENERATE_STREAK_FOR_BLAND;
            let mut entering = None;
            let mut best = -tol;
            for j in 0..eligible {
                let rc = t.cost[j];
                if rc < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = rc;
                }
            }
            let Some(col) = entering else {
                return Outcome::Optimal;
            };

            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..t.n_rows {
                let a = t.at(r, col);
                if a <= tol {
                    continue;
                }
                let ratio = t.rhs(r).max(0.0) / a;
                leaving = match leaving {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                        if (tie && t.basis[r] < t.basis[lr]) || (!tie && ratio < lratio) {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            let Some((row, ratio)) = leaving else {
                return Outcome::Unbounded;
            };
            if ratio <= tol {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            t.pivot(row, col);
            *iterations += 1;
        }
    }
}

impl LpSolver for DenseSimplex {
    fn solve(&self, lp: &LinearProgram) -> LpSolution {
        let failed = |status, iterations| LpSolution { status, value: f64::NAN, point: vec![], iterations };
        if lp.check_shape().is_err() {
            return failed(LpStatus::Malformed, 0);
        }

        let n = lp.n_vars();
        let n_eq = lp.equalities.len();
        let n_ub = lp.inequalities.len();
        let n_rows = n_eq + n_ub;

        // shift x = lower + y so that y >= 0
        let shifted_rhs = |coef: &[f64], rhs: f64| rhs - super::dot(coef, &lp.lower_bounds);

        // rows that start with their slack basic need no artificial
        let mut needs_artificial = vec![true; n_rows];
        let mut rhs = Vec::with_capacity(n_rows);
        for c in &lp.equalities {
            rhs.push(shifted_rhs(&c.coefficients, c.rhs));
        }
        for (i, c) in lp.inequalities.iter().enumerate() {
            let b = shifted_rhs(&c.coefficients, c.rhs);
            needs_artificial[n_eq + i] = b < 0.0;
            rhs.push(b);
        }
        let n_art = needs_artificial.iter().filter(|&&x| x).count();
        let n_cols = n + n_ub + n_art;
        let width = n_cols + 1;

        let mut t = Tableau { n_rows, width, data: vec![0.0; n_rows * width], cost: vec![], basis: vec![0; n_rows] };
        let mut next_art = n + n_ub;
        for (r, c) in lp.equalities.iter().chain(&lp.inequalities).enumerate() {
            let sign = if rhs[r] < 0.0 { -1.0 } else { 1.0 };
            let row = &mut t.data[r * width..(r + 1) * width];
            for (j, &v) in c.coefficients.iter().enumerate() {
                row[j] = sign * v;
            }
            if r >= n_eq {
                row[n + r - n_eq] = sign;
            }
            row[n_cols] = sign * rhs[r];
            if needs_artificial[r] {
                row[next_art] = 1.0;
                t.basis[r] = next_art;
                next_art += 1;
            } else {
                t.basis[r] = n + r - n_eq;
            }
        }

        let mut iterations = 0;

        if n_art > 0 {
            let mut phase1 = vec![0.0; n_cols];
            for v in &mut phase1[n + n_ub..] {
                *v = 1.0;
            }
            t.set_costs(&phase1);
            match self.iterate(&mut t, n_cols, &mut iterations) {
                Outcome::Optimal => {}
                // phase 1 is bounded below by zero
                Outcome::Unbounded | Outcome::IterationLimit => {
                    return failed(LpStatus::IterationLimit, iterations);
                }
            }
            let scale = 1.0 + rhs.iter().fold(0.0f64, |m, b| m.max(b.abs()));
            if t.objective() > self.feasibility_tolerance * scale {
                return failed(LpStatus::Infeasible, iterations);
            }
            // drive remaining artificials out of the basis where possible
            for r in 0..n_rows {
                if t.basis[r] >= n + n_ub {
                    if let Some(j) = (0..n + n_ub).find(|&j| t.at(r, j).abs() > self.pivot_tolerance) {
                        t.pivot(r, j);
                        iterations += 1;
                    }
                }
            }
        }

        let mut phase2 = vec![0.0; n_cols];
        phase2[..n].copy_from_slice(&lp.objective);
        t.set_costs(&phase2);
        match self.iterate(&mut t, n + n_ub, &mut iterations) {
            Outcome::Optimal => {}
            Outcome::Unbounded => return failed(LpStatus::Unbounded, iterations),
            Outcome::IterationLimit => return failed(LpStatus::IterationLimit, iterations),
        }

        let mut point = lp.lower_bounds.clone();
        for r in 0..n_rows {
            let j = t.basis[r];
            if j < n {
                point[j] += t.rhs(r);
            }
        }
        let value = lp.objective_at(&point);
        LpSolution { status: LpStatus::Optimal, value, point, iterations }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve;

    fn lp(n: usize) -> LinearProgram {
        LinearProgram::new((0..n).map(|i| format!("x{i}")).collect())
    }

    #[test]
    fn lower_bound_only() {
        let mut p = lp(1);
        p.objective = vec![1.0];
        p.lower_bounds = vec![3.0];
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.value, 3.0);
    }

    #[test]
    fn ge_constraint() {
        let mut p = lp(1);
        p.objective = vec![1.0];
        p.add_ge("min3", vec![1.0], 3.0);
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded() {
        let mut p = lp(1);
        p.objective = vec![-1.0];
        assert_eq!(solve(&p).status, LpStatus::Unbounded);
    }

    #[test]
    fn infeasible() {
        let mut p = lp(2);
        p.objective = vec![1.0, 1.0];
        p.add_le("a", vec![1.0, 1.0], 1.0);
        p.add_ge("b", vec![1.0, 1.0], 2.0);
        assert_eq!(solve(&p).status, LpStatus::Infeasible);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let mut p = lp(2);
        p.objective = vec![-3.0, -5.0];
        p.add_le("c1", vec![1.0, 0.0], 4.0);
        p.add_le("c2", vec![0.0, 2.0], 12.0);
        p.add_le("c3", vec![3.0, 2.0], 18.0);
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value + 36.0).abs() < 1e-9);
        assert!((s.point[0] - 2.0).abs() < 1e-9 && (s.point[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equalities_and_redundant_rows() {
        // x + y = 1 twice, minimize x - y -> -1
        let mut p = lp(2);
        p.objective = vec![1.0, -1.0];
        p.add_eq("e1", vec![1.0, 1.0], 1.0);
        p.add_eq("e2", vec![2.0, 2.0], 2.0);
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value + 1.0).abs() < 1e-12);
        assert!(p.max_residual(&s.point) < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under naive Dantzig pivoting.
        let mut p = lp(4);
        p.objective = vec![-0.75, 150.0, -0.02, 6.0];
        p.add_le("r1", vec![0.25, -60.0, -0.04, 9.0], 0.0);
        p.add_le("r2", vec![0.5, -90.0, -0.02, 3.0], 0.0);
        p.add_le("r3", vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value + 0.05).abs() < 1e-9, "{}", s.value);
    }

    #[test]
    fn malformed_input_is_reported() {
        let mut p = lp(2);
        p.objective = vec![1.0];
        assert_eq!(solve(&p).status, LpStatus::Malformed);
    }
}
