use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use super::{solve, LinearProgram, LpStatus};
use crate::combinatorics::{binomial, check_demand_count, enumerate_demand_classes, leader_group, subsets_meeting};
use crate::error::{Error, Result};
use crate::model::{validate_placement, Placement, ProblemInstance};
use crate::rates::demand_from_index;

/// Largest `N^K * 2^K` accepted when aggregating P0 coefficients.
pub const P0_ENUMERATION_LIMIT: u128 = 100_000_000;

/// Largest distinct-request set whose orderings are expanded into P1 rows.
pub const P1_SET_SIZE_LIMIT: usize = 8;

const COEFFICIENT_CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ProblemKind {
    /// MCCS placement optimization over popularity-first placements.
    P0,
    /// Converse bound under any uncoded placement.
    P1,
    /// Converse bound under popularity-first placements.
    P2,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::P0 => "P0",
            ProblemKind::P1 => "P1",
            ProblemKind::P2 => "P2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVariant {
    P1,
    P2,
}

impl From<BoundVariant> for ProblemKind {
    fn from(v: BoundVariant) -> Self {
        match v {
            BoundVariant::P1 => ProblemKind::P1,
            BoundVariant::P2 => ProblemKind::P2,
        }
    }
}

/// Column of `a[file][level]` in every placement program.
pub fn placement_variable(k_users: usize, file: usize, level: usize) -> usize {
    file * (k_users + 1) + level
}

fn placement_names(n: usize, k: usize) -> Vec<String> {
    (0..n).flat_map(|f| (0..=k).map(move |l| format!("a_{}_{}", f + 1, l))).collect()
}

/// Partition equalities, the cache inequality and, optionally, the
/// popularity-first ordering for levels `1..=K`.
fn add_placement_constraints(lp: &mut LinearProgram, instance: &ProblemInstance, popularity_first: bool) {
    let (n, k) = (instance.n_files(), instance.k_users());
    let width = lp.n_vars();
    for f in 0..n {
        let mut row = vec![0.0; width];
        for l in 0..=k {
            row[placement_variable(k, f, l)] = binomial(k as i64, l as i64) as f64;
        }
        lp.add_eq(format!("partition_{}", f + 1), row, 1.0);
    }
    let mut row = vec![0.0; width];
    for f in 0..n {
        for l in 1..=k {
            row[placement_variable(k, f, l)] = binomial(k as i64 - 1, l as i64 - 1) as f64;
        }
    }
    lp.add_le("cache", row, instance.cache_size());
    if popularity_first {
        for f in 0..n.saturating_sub(1) {
            for l in 1..=k {
                let mut row = vec![0.0; width];
                row[placement_variable(k, f + 1, l)] = 1.0;
                row[placement_variable(k, f, l)] = -1.0;
                lp.add_le(format!("popfirst_{}_{}", f + 1, l), row, 0.0);
            }
        }
    }
}

/// Linear P0 objective: `c[n][l]` is the expected number of non-redundant
/// subsets of size `l + 1` whose most popular requested file is `n`.
///
/// Under a popularity-first placement the zero-padded message length for
/// such a subset is exactly `a[n][l]`, so `c . a` is the average MCCS rate.
pub fn p0_coefficients(instance: &ProblemInstance) -> Result<Vec<f64>> {
    let (n, k) = (instance.n_files(), instance.k_users());
    let demands = check_demand_count(instance, u128::MAX)?;
    let work = demands.saturating_mul(1u128 << k);
    if work > P0_ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            what: "P0 demand-subset pairs",
            count: work,
            limit: P0_ENUMERATION_LIMIT,
        });
    }
    let demands = demands as u64;
    let p = instance.popularity();
    let width = n * (k + 1);
    let n_chunks = demands.div_ceil(COEFFICIENT_CHUNK);
    let partials: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = vec![0.0; width];
            let end = ((chunk + 1) * COEFFICIENT_CHUNK).min(demands);
            for index in chunk * COEFFICIENT_CHUNK..end {
                let d = demand_from_index(index as u128, n, k);
                let prob: f64 = d.requests().iter().map(|&f| p[f]).product();
                if prob == 0.0 {
                    continue;
                }
                for subset in subsets_meeting(k, leader_group(&d)) {
                    let top = subset.users().map(|u| d.file_of(u)).min().expect("nonempty subset");
                    acc[placement_variable(k, top, subset.len() - 1)] += prob;
                }
            }
            acc
        })
        .collect();
    let mut coefficients = vec![0.0; width];
    for partial in &partials {
        for (c, v) in coefficients.iter_mut().zip(partial) {
            *c += v;
        }
    }
    Ok(coefficients)
}

/// MCCS placement problem over popularity-first placements.
pub fn build_p0(instance: &ProblemInstance) -> Result<LinearProgram> {
    let (n, k) = (instance.n_files(), instance.k_users());
    let mut lp = LinearProgram::new(placement_names(n, k));
    lp.objective = p0_coefficients(instance)?;
    add_placement_constraints(&mut lp, instance, true);
    Ok(lp)
}

fn check_p1_size(instance: &ProblemInstance) -> Result<()> {
    let largest = instance.n_files().min(instance.k_users());
    if largest > P1_SET_SIZE_LIMIT {
        return Err(Error::EnumerationLimit {
            what: "distinct set size for P1 orderings",
            count: largest as u128,
            limit: P1_SET_SIZE_LIMIT as u128,
        });
    }
    Ok(())
}

/// `sum_l C(K - rank - 1, l)` as coefficients on `a[file][.]`.
fn add_positional_terms(row: &mut [f64], k: usize, rank: usize, file: usize, scale: f64) {
    for l in 0..k {
        row[placement_variable(k, file, l)] += scale * binomial((k - rank - 1) as i64, l as i64) as f64;
    }
}

/// Converse bound under any uncoded placement, with one epigraph variable per
/// distinct-request set and one row per ordering of that set.
pub fn build_p1(instance: &ProblemInstance) -> Result<LinearProgram> {
    check_p1_size(instance)?;
    let (n, k) = (instance.n_files(), instance.k_users());
    let classes = enumerate_demand_classes(instance)?;
    let base = n * (k + 1);
    let mut names = placement_names(n, k);
    names.extend(classes.iter().map(|c| format!("r_{}", c.labels().iter().join("_"))));
    let mut lp = LinearProgram::new(names);
    for (j, class) in classes.iter().enumerate() {
        lp.objective[base + j] = class.weight;
    }
    add_placement_constraints(&mut lp, instance, false);
    let width = lp.n_vars();
    for (j, class) in classes.iter().enumerate() {
        for (o, order) in class.distinct_set.iter().copied().permutations(class.distinct_set.len()).enumerate() {
            let mut row = vec![0.0; width];
            for (rank, &file) in order.iter().enumerate() {
                add_positional_terms(&mut row, k, rank, file, 1.0);
            }
            row[base + j] = -1.0;
            lp.add_le(format!("epigraph_{}_{}", class.labels().iter().join("_"), o + 1), row, 0.0);
        }
    }
    Ok(lp)
}

/// Converse bound under popularity-first placements; each set's files are
/// taken in decreasing popularity, so no epigraph variables are needed.
pub fn build_p2(instance: &ProblemInstance) -> Result<LinearProgram> {
    check_p1_size(instance)?;
    let (n, k) = (instance.n_files(), instance.k_users());
    let classes = enumerate_demand_classes(instance)?;
    let mut lp = LinearProgram::new(placement_names(n, k));
    for class in &classes {
        for (rank, &file) in class.distinct_set.iter().enumerate() {
            add_positional_terms(&mut lp.objective, k, rank, file, class.weight);
        }
    }
    add_placement_constraints(&mut lp, instance, true);
    Ok(lp)
}

pub fn build(instance: &ProblemInstance, kind: ProblemKind) -> Result<LinearProgram> {
    match kind {
        ProblemKind::P0 => build_p0(instance),
        ProblemKind::P1 => build_p1(instance),
        ProblemKind::P2 => build_p2(instance),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementSolution {
    pub placement: Placement,
    pub optimal_rate: f64,
    pub problem: ProblemKind,
    pub status: LpStatus,
    pub iterations: usize,
}

/// Builds and solves `kind`, returning a validated placement.
pub fn solve_problem(instance: &ProblemInstance, kind: ProblemKind) -> Result<PlacementSolution> {
    let lp = build(instance, kind)?;
    let solution = solve(&lp);
    if !solution.is_optimal() {
        return Err(Error::Solver { problem: kind.to_string(), status: solution.status });
    }
    let (n, k) = (instance.n_files(), instance.k_users());
    // basic solutions can carry round-off below zero
    let values: Vec<f64> = solution.point[..n * (k + 1)].iter().map(|v| v.max(0.0)).collect();
    let placement = Placement::from_flat(n, k, &values)?;
    let report = validate_placement(instance, &placement, kind != ProblemKind::P1)?;
    if !report.is_valid() {
        return Err(Error::InvalidPlacement { worst_violation: report.worst_violation });
    }
    Ok(PlacementSolution {
        placement,
        optimal_rate: solution.value,
        problem: kind,
        status: solution.status,
        iterations: solution.iterations,
    })
}

/// Optimized MCCS placement (P0).
pub fn optimize_mccs(instance: &ProblemInstance) -> Result<PlacementSolution> {
    solve_problem(instance, ProblemKind::P0)
}

/// Optimal value and minimizer of a converse-bound program.
pub fn lower_bound(instance: &ProblemInstance, variant: BoundVariant) -> Result<PlacementSolution> {
    solve_problem(instance, variant.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::zipf_popularity;
    use crate::rates::{avg_rate_lb, avg_rate_mccs};

    fn inst(p: Vec<f64>, k: usize, m: f64) -> ProblemInstance {
        ProblemInstance::new(p.len(), k, m, p).unwrap()
    }

    #[test]
    fn p0_coefficients_two_by_two() {
        let c = p0_coefficients(&inst(vec![0.6, 0.4], 2, 1.0)).unwrap();
        let want = [0.84, 0.84, 0.0, 0.64, 0.16, 0.0];
        for (got, want) in c.iter().zip(want) {
            assert!((got - want).abs() < 1e-15, "{c:?}");
        }
        assert!((c[0] + c[3] - 1.48).abs() < 1e-15);
    }

    #[test]
    fn p0_single_file() {
        let c = p0_coefficients(&inst(vec![1.0], 3, 1.0)).unwrap();
        assert_eq!(c, vec![1.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn p1_shape() {
        let lp = build_p1(&inst(zipf_popularity(4, 0.8), 4, 1.0)).unwrap();
        assert_eq!(lp.n_vars(), 20 + 15);
        let epigraph = lp.inequalities.iter().filter(|c| c.name.starts_with("epigraph")).count();
        assert_eq!(epigraph, 64);
        assert!(lp.inequalities.iter().all(|c| !c.name.starts_with("popfirst")));
    }

    #[test]
    fn p2_shape() {
        let lp = build_p2(&inst(zipf_popularity(4, 0.8), 4, 1.0)).unwrap();
        assert_eq!(lp.n_vars(), 20);
        assert_eq!(lp.inequalities.len(), 1 + 3 * 4);
        assert_eq!(lp.equalities.len(), 4);
    }

    #[test]
    fn objectives_match_rate_functionals() {
        let i = inst(vec![0.5, 0.3, 0.2], 3, 3.0);
        let a = Placement::from_rows(vec![
            vec![0.1, 0.15, 0.1, 0.15],
            vec![0.46, 0.1, 0.08, 0.0],
            vec![0.67, 0.05, 0.06, 0.0],
        ])
        .unwrap();
        let p0 = build_p0(&i).unwrap();
        assert!((p0.objective_at(a.as_flat()) - avg_rate_mccs(&i, &a).unwrap()).abs() < 1e-12);
        let p2 = build_p2(&i).unwrap();
        assert!((p2.objective_at(a.as_flat()) - avg_rate_lb(&i, &a, true).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn endpoints() {
        for kind in [ProblemKind::P0, ProblemKind::P1, ProblemKind::P2] {
            let zero = solve_problem(&inst(vec![0.6, 0.4], 2, 0.0), kind).unwrap();
            assert!((zero.optimal_rate - 1.48).abs() < 1e-9, "{kind}: {}", zero.optimal_rate);
            let full = solve_problem(&inst(vec![0.6, 0.4], 2, 2.0), kind).unwrap();
            assert!(full.optimal_rate.abs() < 1e-9, "{kind}: {}", full.optimal_rate);
        }
    }

    #[test]
    fn single_file_bound() {
        for m in [0.0, 0.25, 0.5, 1.0] {
            let s = lower_bound(&inst(vec![1.0], 3, m), BoundVariant::P1).unwrap();
            assert!((s.optimal_rate - (1.0 - m).max(0.0)).abs() < 1e-9, "M = {m}: {}", s.optimal_rate);
        }
    }

    #[test]
    fn guards() {
        let big = inst(zipf_popularity(10, 1.0), 9, 1.0);
        assert!(matches!(build_p1(&big), Err(Error::EnumerationLimit { .. })));
        assert!(matches!(build_p0(&big), Err(Error::EnumerationLimit { .. })));
    }
}
