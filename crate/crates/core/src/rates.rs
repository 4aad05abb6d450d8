//! Delivery-rate functionals.
//!
//! All rates are in units of files. The per-demand MCCS rate sums the
//! zero-padded coded message lengths over the non-redundant user subsets;
//! the converse bounds are evaluated per distinct-request set.

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{
    binomial, check_demand_count, distinct_set, enumerate_demand_classes, leader_group, subsets_meeting, DemandVector,
    UserSubset, DEMAND_ENUMERATION_LIMIT,
};
use crate::error::{Error, Result};
use crate::model::{require_valid, Placement, ProblemInstance};

/// Largest distinct-request set for which all permutations are tried.
pub const PERMUTATION_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateBreakdown {
    pub total: f64,
    /// Entry `l` is the load carried by messages to subsets of size `l + 1`.
    pub per_subset_size: Vec<f64>,
}

impl RateBreakdown {
    fn from_levels(per_subset_size: Vec<f64>) -> Self {
        Self { total: pairwise_sum(&per_subset_size), per_subset_size }
    }
}

/// Which per-demand rate to average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateKind {
    Mccs,
    LowerBound,
}

/// Pairwise (cascade) summation in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => {
            let (left, right) = values.split_at(n / 2);
            pairwise_sum(left) + pairwise_sum(right)
        }
    }
}

fn check_demand(instance: &ProblemInstance, d: &DemandVector) -> Result<()> {
    if d.k_users() != instance.k_users() {
        return Err(Error::OutOfRange(format!("demand has {} entries for {} users", d.k_users(), instance.k_users())));
    }
    if let Some(&f) = d.requests().iter().find(|&&f| f >= instance.n_files()) {
        return Err(Error::OutOfRange(format!("requested file {f} does not exist")));
    }
    Ok(())
}

/// Zero-padded length of the coded message for `subset`.
#[inline]
pub fn padded_length(placement: &Placement, d: &DemandVector, subset: UserSubset) -> f64 {
    let level = subset.len() - 1;
    subset.users().map(|k| placement.get(d.file_of(k), level)).fold(0.0, f64::max)
}

fn mccs_breakdown(placement: &Placement, d: &DemandVector, leaders: UserSubset) -> RateBreakdown {
    let k = d.k_users();
    let mut levels = vec![0.0; k];
    for subset in subsets_meeting(k, leaders) {
        levels[subset.len() - 1] += padded_length(placement, d, subset);
    }
    RateBreakdown::from_levels(levels)
}

/// MCCS delivery rate for demand `d` with the canonical leader group.
pub fn rate_mccs(instance: &ProblemInstance, placement: &Placement, d: &DemandVector) -> Result<RateBreakdown> {
    require_valid(instance, placement, false)?;
    check_demand(instance, d)?;
    Ok(mccs_breakdown(placement, d, leader_group(d)))
}

/// MCCS delivery rate with an explicit leader group (one requesting user per
/// distinct file).
pub fn rate_mccs_with_leaders(
    instance: &ProblemInstance,
    placement: &Placement,
    d: &DemandVector,
    leaders: UserSubset,
) -> Result<RateBreakdown> {
    require_valid(instance, placement, false)?;
    check_demand(instance, d)?;
    let files: Vec<usize> = leaders.users().map(|u| d.file_of(u)).sorted_unstable().collect();
    if files != distinct_set(d) {
        return Err(Error::OutOfRange(format!("{leaders} is not a leader group for demand {:?}", d.labels())));
    }
    Ok(mccs_breakdown(placement, d, leaders))
}

/// Leaders ordered by the popularity of their requested file.
fn leaders_by_popularity(d: &DemandVector) -> Vec<usize> {
    leader_group(d).users().sorted_by_key(|&u| d.file_of(u)).collect()
}

/// MCCS delivery rate regrouped by the leader each message is charged to.
///
/// A non-redundant subset is charged to the most popular leader it contains;
/// the messages charged to leader `i` are exactly the subsets that contain
/// that leader and none of the more popular ones. Requires a popularity-first
/// placement.
pub fn rate_mccs_grouped(instance: &ProblemInstance, placement: &Placement, d: &DemandVector) -> Result<RateBreakdown> {
    require_valid(instance, placement, true)?;
    check_demand(instance, d)?;
    let k = d.k_users();
    let everyone = UserSubset::all(k);
    let mut levels = vec![0.0; k];
    let mut excluded = UserSubset::EMPTY;
    for (rank, &leader) in leaders_by_popularity(d).iter().enumerate() {
        let allowed = UserSubset(everyone.0 & !excluded.0);
        let mut counts = vec![0u64; k];
        // submasks of `allowed` that contain `leader`
        let rest = allowed.without(leader).0;
        let mut sub = rest;
        loop {
            let subset = UserSubset(sub).with(leader);
            let level = subset.len() - 1;
            levels[level] += padded_length(placement, d, subset);
            counts[level] += 1;
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        debug_assert!(counts.iter().enumerate().all(|(l, &c)| c == binomial((k - rank - 1) as i64, l as i64)));
        excluded = excluded.with(leader);
    }
    Ok(RateBreakdown::from_levels(levels))
}

/// Demand number `index` in lexicographic order.
pub(crate) fn demand_from_index(mut index: u128, n_files: usize, k_users: usize) -> DemandVector {
    let mut requests = vec![0; k_users];
    for slot in requests.iter_mut().rev() {
        *slot = (index % n_files as u128) as usize;
        index /= n_files as u128;
    }
    DemandVector::from_vec_unchecked(requests)
}

/// Exact average of `term` over all demands, weighted by demand probability.
fn average_over_demands<F>(instance: &ProblemInstance, term: F) -> Result<f64>
where
    F: Fn(&DemandVector) -> f64 + Sync,
{
    let count = check_demand_count(instance, DEMAND_ENUMERATION_LIMIT)?;
    let (n, k) = (instance.n_files(), instance.k_users());
    let p = instance.popularity();
    let terms: Vec<f64> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let d = demand_from_index(i as u128, n, k);
            let prob: f64 = d.requests().iter().map(|&f| p[f]).product();
            if prob == 0.0 {
                0.0
            } else {
                prob * term(&d)
            }
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Expected MCCS rate over all `N^K` demands.
pub fn avg_rate_mccs(instance: &ProblemInstance, placement: &Placement) -> Result<f64> {
    require_valid(instance, placement, false)?;
    average_over_demands(instance, |d| mccs_breakdown(placement, d, leader_group(d)).total)
}

/// `sum_l C(K - rank - 1, l) a[file][l]`: the bound contribution of `file`
/// when it is delivered in position `rank` (0-based).
#[inline]
fn positional_load(placement: &Placement, k_users: usize, rank: usize, file: usize) -> f64 {
    (0..k_users).map(|l| binomial((k_users - rank - 1) as i64, l as i64) as f64 * placement.get(file, l)).sum()
}

fn check_distinct_set(instance: &ProblemInstance, files: &[usize]) -> Result<()> {
    if files.is_empty() || files.len() > instance.k_users() {
        return Err(Error::OutOfRange(format!(
            "distinct set must have between 1 and {} files, got {}",
            instance.k_users(),
            files.len()
        )));
    }
    if files.iter().any(|&f| f >= instance.n_files()) || !files.iter().all_unique() {
        return Err(Error::OutOfRange(format!("invalid distinct set {files:?}")));
    }
    Ok(())
}

fn lb_max_over_orders(placement: &Placement, k_users: usize, files: &[usize]) -> f64 {
    files
        .iter()
        .copied()
        .permutations(files.len())
        .map(|order| {
            order.iter().enumerate().map(|(rank, &file)| positional_load(placement, k_users, rank, file)).sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn lb_popularity_order(placement: &Placement, k_users: usize, files: &[usize]) -> f64 {
    files
        .iter()
        .copied()
        .sorted_unstable()
        .enumerate()
        .map(|(rank, file)| positional_load(placement, k_users, rank, file))
        .sum()
}

/// Converse bound for distinct-request set `files`: the maximum over every
/// delivery order of the files.
pub fn rate_lb(instance: &ProblemInstance, placement: &Placement, files: &[usize]) -> Result<f64> {
    require_valid(instance, placement, false)?;
    check_distinct_set(instance, files)?;
    if files.len() > PERMUTATION_LIMIT {
        return Err(Error::EnumerationLimit {
            what: "distinct set size for permutation search",
            count: files.len() as u128,
            limit: PERMUTATION_LIMIT as u128,
        });
    }
    Ok(lb_max_over_orders(placement, instance.k_users(), files))
}

/// Converse bound for a popularity-first placement, with the files taken in
/// decreasing popularity.
pub fn rate_lb_popfirst(instance: &ProblemInstance, placement: &Placement, files: &[usize]) -> Result<f64> {
    require_valid(instance, placement, true)?;
    check_distinct_set(instance, files)?;
    Ok(lb_popularity_order(placement, instance.k_users(), files))
}

/// `sum_D w_D R_lb(D)`; with `popularity_first` the ordered form is used and
/// the placement must be popularity-first.
pub fn avg_rate_lb(instance: &ProblemInstance, placement: &Placement, popularity_first: bool) -> Result<f64> {
    require_valid(instance, placement, popularity_first)?;
    let k = instance.k_users();
    let classes = enumerate_demand_classes(instance)?;
    if !popularity_first {
        if let Some(c) = classes.iter().find(|c| c.distinct_set.len() > PERMUTATION_LIMIT) {
            return Err(Error::EnumerationLimit {
                what: "distinct set size for permutation search",
                count: c.distinct_set.len() as u128,
                limit: PERMUTATION_LIMIT as u128,
            });
        }
    }
    let terms: Vec<f64> = classes
        .par_iter()
        .map(|c| {
            let bound = if popularity_first {
                lb_popularity_order(placement, k, &c.distinct_set)
            } else {
                lb_max_over_orders(placement, k, &c.distinct_set)
            };
            c.weight * bound
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Expected rate conditioned on all `K` requests being distinct, using the
/// exact normalized conditional demand distribution.
pub fn avg_rate_distinct(instance: &ProblemInstance, placement: &Placement, which: RateKind) -> Result<f64> {
    let (n, k) = (instance.n_files(), instance.k_users());
    if k > n {
        return Err(Error::OutOfRange(format!("all-distinct demands need K <= N, got K = {k}, N = {n}")));
    }
    require_valid(instance, placement, which == RateKind::LowerBound)?;
    let all_distinct = |d: &DemandVector| d.requests().iter().all_unique();
    let mass = average_over_demands(instance, |d| if all_distinct(d) { 1.0 } else { 0.0 })?;
    if mass <= 0.0 {
        return Err(Error::OutOfRange("demands with all-distinct requests have zero probability".into()));
    }
    let weighted = average_over_demands(instance, |d| {
        if !all_distinct(d) {
            return 0.0;
        }
        match which {
            RateKind::Mccs => mccs_breakdown(placement, d, leader_group(d)).total,
            RateKind::LowerBound => lb_popularity_order(placement, k, &distinct_set(d)),
        }
    })?;
    Ok(weighted / mass)
}
