//! User subsets, demand vectors, leader groups and demand-class weights.

use std::fmt;

use itertools::Itertools;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::ProblemInstance;

/// Largest `N^K` that may be enumerated demand by demand.
pub const DEMAND_ENUMERATION_LIMIT: u128 = 10_000_000;

/// `C(n, k)`, zero whenever `k < 0`, `n < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> u64 {
    if n < 0 || k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc: u64 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// A set of users stored as a bitmask; bit `k` is user `k`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct UserSubset(pub u32);

impl UserSubset {
    pub const EMPTY: Self = Self(0);

    pub fn from_users(users: impl IntoIterator<Item = usize>) -> Self {
        Self(users.into_iter().fold(0, |acc, u| acc | (1 << u)))
    }

    /// `{0, .., k-1}`.
    pub fn all(k_users: usize) -> Self {
        Self(((1u64 << k_users) - 1) as u32)
    }

    #[inline]
    pub fn contains(self, user: usize) -> bool {
        self.0 >> user & 1 == 1
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    #[inline]
    pub fn without(self, user: usize) -> Self {
        Self(self.0 & !(1 << user))
    }

    #[inline]
    pub fn with(self, user: usize) -> Self {
        Self(self.0 | (1 << user))
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing order.
    pub fn users(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let u = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(u)
        })
    }

    /// Members as 1-based labels, for reports.
    pub fn labels(self) -> Vec<usize> {
        self.users().map(|u| u + 1).collect()
    }
}

impl fmt::Debug for UserSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for UserSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels().iter().join(","))
    }
}

impl Serialize for UserSubset {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.labels())
    }
}

/// Every subset of `{0..k-1}`, including the empty set, in bitmask order.
pub fn all_subsets(k_users: usize) -> impl Iterator<Item = UserSubset> {
    (0..1u64 << k_users).map(|m| UserSubset(m as u32))
}

/// All `C(K, l)` subsets of size `l`, in increasing bitmask order.
pub fn subsets_of_size(k_users: usize, size: usize) -> Result<Vec<UserSubset>> {
    if size > k_users {
        return Err(Error::OutOfRange(format!("subset size {size} exceeds {k_users} users")));
    }
    Ok(all_subsets(k_users).filter(|s| s.len() == size).collect())
}

/// Requested file of every user (0-based file indices).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DemandVector(Vec<usize>);

impl DemandVector {
    pub fn new(requests: Vec<usize>, n_files: usize) -> Result<Self> {
        if requests.is_empty() {
            return Err(Error::OutOfRange("demand vector is empty".into()));
        }
        if let Some(&bad) = requests.iter().find(|&&f| f >= n_files) {
            return Err(Error::OutOfRange(format!("requested file {bad} but only {n_files} files exist")));
        }
        Ok(Self(requests))
    }

    /// Builds a demand from 1-based file labels.
    pub fn from_labels(labels: &[usize], n_files: usize) -> Result<Self> {
        if labels.contains(&0) {
            return Err(Error::OutOfRange("file labels start at 1".into()));
        }
        Self::new(labels.iter().map(|l| l - 1).collect(), n_files)
    }

    pub(crate) fn from_vec_unchecked(requests: Vec<usize>) -> Self {
        Self(requests)
    }

    pub fn requests(&self) -> &[usize] {
        &self.0
    }

    pub fn k_users(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn file_of(&self, user: usize) -> usize {
        self.0[user]
    }

    pub fn labels(&self) -> Vec<usize> {
        self.0.iter().map(|f| f + 1).collect()
    }

    /// Number of distinct requested files.
    pub fn n_distinct(&self) -> usize {
        self.distinct_set().len()
    }

    pub fn distinct_set(&self) -> Vec<usize> {
        distinct_set(self)
    }
}

/// Distinct requested files in increasing index order.
pub fn distinct_set(d: &DemandVector) -> Vec<usize> {
    d.0.iter().copied().sorted_unstable().dedup().collect()
}

/// Lowest-index user requesting each distinct file.
pub fn leader_group(d: &DemandVector) -> UserSubset {
    let mut seen: Vec<usize> = Vec::with_capacity(d.k_users());
    let mut leaders = UserSubset::EMPTY;
    for (user, &file) in d.0.iter().enumerate() {
        if !seen.contains(&file) {
            seen.push(file);
            leaders = leaders.with(user);
        }
    }
    leaders
}

/// Every choice of one requesting user per distinct file.
pub fn all_leader_groups(d: &DemandVector) -> Vec<UserSubset> {
    distinct_set(d)
        .into_iter()
        .map(|file| (0..d.k_users()).filter(|&u| d.file_of(u) == file).collect::<Vec<_>>())
        .multi_cartesian_product()
        .map(UserSubset::from_users)
        .collect()
}

/// Nonempty subsets meeting `leaders`, in bitmask order.
pub fn subsets_meeting(k_users: usize, leaders: UserSubset) -> impl Iterator<Item = UserSubset> {
    all_subsets(k_users).filter(move |s| s.intersects(leaders))
}

/// Non-redundant user subsets for the canonical leader group.
pub fn non_redundant_subsets(d: &DemandVector) -> Vec<UserSubset> {
    subsets_meeting(d.k_users(), leader_group(d)).collect()
}

/// `prod_k p[d_k]`.
pub fn demand_probability(instance: &ProblemInstance, d: &DemandVector) -> f64 {
    let p = instance.popularity();
    d.0.iter().map(|&f| p[f]).product()
}

/// Fails when `N^K` exceeds `limit`.
pub fn check_demand_count(instance: &ProblemInstance, limit: u128) -> Result<u128> {
    let count = (instance.n_files() as u128).checked_pow(instance.k_users() as u32).unwrap_or(u128::MAX);
    if count > limit {
        return Err(Error::EnumerationLimit { what: "number of demand vectors", count, limit });
    }
    Ok(count)
}

/// Iterates over all `N^K` demand vectors in lexicographic order.
pub fn all_demands(instance: &ProblemInstance) -> Result<impl Iterator<Item = DemandVector>> {
    check_demand_count(instance, DEMAND_ENUMERATION_LIMIT)?;
    Ok(demands_over(instance.n_files(), instance.k_users()))
}

fn demands_over(n_files: usize, k_users: usize) -> impl Iterator<Item = DemandVector> {
    (0..k_users).map(|_| 0..n_files).multi_cartesian_product().map(DemandVector)
}

/// `w_D`: probability that the set of distinct requests equals `files`,
/// by inclusion–exclusion over subsets of `files`.
pub fn distinct_set_weight(instance: &ProblemInstance, files: &[usize]) -> f64 {
    let k = instance.k_users();
    if files.is_empty() || files.len() > k {
        return 0.0;
    }
    let p = instance.popularity();
    let size = files.len();
    let mut total = 0.0;
    for mask in 0u64..(1 << size) {
        let chosen = mask.count_ones() as usize;
        let mass: f64 = (0..size).filter(|i| mask >> i & 1 == 1).map(|i| p[files[i]]).sum();
        let term = mass.powi(k as i32);
        if (size - chosen).is_multiple_of(2) {
            total += term;
        } else {
            total -= term;
        }
    }
    total.max(0.0)
}

/// `w_D` by summing the probability of every demand in `D^K` that uses all of `D`.
pub fn distinct_set_weight_enumerated(instance: &ProblemInstance, files: &[usize]) -> f64 {
    let k = instance.k_users();
    if files.is_empty() || files.len() > k {
        return 0.0;
    }
    let p = instance.popularity();
    (0..k)
        .map(|_| files.iter().copied())
        .multi_cartesian_product()
        .filter(|d| files.iter().all(|f| d.contains(f)))
        .map(|d| d.iter().map(|&f| p[f]).product::<f64>())
        .sum()
}

/// Distinct-request set `D` together with its probability mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandClass {
    pub distinct_set: Vec<usize>,
    pub weight: f64,
}

impl DemandClass {
    /// A demand in this class: the first `|D|` users request the files of
    /// `D` in increasing order and the rest request the most popular one.
    pub fn representative(&self, k_users: usize) -> DemandVector {
        let first = self.distinct_set[0];
        DemandVector((0..k_users).map(|u| self.distinct_set.get(u).copied().unwrap_or(first)).collect())
    }

    pub fn labels(&self) -> Vec<usize> {
        self.distinct_set.iter().map(|f| f + 1).collect()
    }
}

/// Nonempty file sets with at most `K` members, in bitmask order.
pub fn candidate_distinct_sets(n_files: usize, k_users: usize) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> =
        (1..=n_files.min(k_users)).flat_map(|size| (0..n_files).combinations(size)).collect();
    // bitmask order is colexicographic order
    sets.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    sets
}

/// One class per distinct-request set with positive weight.
pub fn enumerate_demand_classes(instance: &ProblemInstance) -> Result<Vec<DemandClass>> {
    check_demand_count(instance, DEMAND_ENUMERATION_LIMIT)?;
    Ok(candidate_distinct_sets(instance.n_files(), instance.k_users())
        .into_iter()
        .filter_map(|distinct_set| {
            let weight = distinct_set_weight(instance, &distinct_set);
            (weight > 0.0).then_some(DemandClass { distinct_set, weight })
        })
        .collect())
}

/// Demands whose distinct-request set equals `files`.
pub fn demands_in_class(k_users: usize, files: &[usize]) -> impl Iterator<Item = DemandVector> + '_ {
    (0..k_users)
        .map(|_| files.iter().copied())
        .multi_cartesian_product()
        .filter(move |d| files.iter().all(|f| d.contains(f)))
        .map(DemandVector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::zipf_popularity;

    fn inst(p: Vec<f64>, k: usize) -> ProblemInstance {
        ProblemInstance::new(p.len(), k, 0.0, p).unwrap()
    }

    fn d(labels: &[usize], n: usize) -> DemandVector {
        DemandVector::from_labels(labels, n).unwrap()
    }

    fn subset(labels: &[usize]) -> UserSubset {
        UserSubset::from_users(labels.iter().map(|l| l - 1))
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial(3, 0), 1);
        assert_eq!(binomial(-1, 0), 0);
        assert_eq!(binomial(5, -1), 0);
        assert_eq!(binomial(30, 15), 155_117_520);
    }

    #[test]
    fn subsets_by_size() {
        assert_eq!(subsets_of_size(3, 2).unwrap(), vec![subset(&[1, 2]), subset(&[1, 3]), subset(&[2, 3])]);
        assert_eq!(subsets_of_size(2, 0).unwrap(), vec![UserSubset::EMPTY]);
        assert_eq!(subsets_of_size(4, 4).unwrap(), vec![subset(&[1, 2, 3, 4])]);
        assert!(subsets_of_size(2, 3).is_err());
        for k in 0..8 {
            for l in 0..=k {
                assert_eq!(subsets_of_size(k, l).unwrap().len() as u64, binomial(k as i64, l as i64));
            }
        }
    }

    #[test]
    fn subset_display_is_one_based() {
        assert_eq!(subset(&[1, 3]).to_string(), "{1,3}");
        assert_eq!(UserSubset::EMPTY.to_string(), "{}");
    }

    #[test]
    fn distinct_sets() {
        assert_eq!(distinct_set(&d(&[1, 1, 2], 2)), vec![0, 1]);
        assert_eq!(distinct_set(&d(&[3, 3, 3, 3], 3)), vec![2]);
        assert_eq!(distinct_set(&d(&[4, 2, 3, 1], 4)), vec![0, 1, 2, 3]);
    }

    #[test]
    fn leader_groups() {
        assert_eq!(leader_group(&d(&[1, 1, 2], 2)), subset(&[1, 3]));
        assert_eq!(leader_group(&d(&[2, 2, 2], 2)), subset(&[1]));
        assert_eq!(leader_group(&d(&[1, 2, 3], 3)), subset(&[1, 2, 3]));
    }

    #[test]
    fn alternative_leader_groups() {
        let groups = all_leader_groups(&d(&[1, 1, 2], 2));
        assert_eq!(groups, vec![subset(&[1, 3]), subset(&[2, 3])]);
        assert_eq!(all_leader_groups(&d(&[1, 1, 1, 1], 1)).len(), 4);
    }

    #[test]
    fn non_redundant_examples() {
        let got = non_redundant_subsets(&d(&[1, 1, 2], 2));
        let want: Vec<_> = (1..8u32).filter(|&m| m != 0b010).map(UserSubset).collect();
        assert_eq!(got, want);
        assert_eq!(non_redundant_subsets(&d(&[1, 2], 2)), vec![subset(&[1]), subset(&[2]), subset(&[1, 2])]);
        assert_eq!(non_redundant_subsets(&d(&[1, 1], 1)), vec![subset(&[1]), subset(&[1, 2])]);
    }

    #[test]
    fn non_redundant_count_matches_formula() {
        for k in 1..=5 {
            let i = inst(zipf_popularity(3, 0.5), k);
            for demand in all_demands(&i).unwrap() {
                let distinct = demand.n_distinct();
                let brute = all_subsets(k)
                    .filter(|s| !s.is_empty() && s.users().any(|u| leader_group(&demand).contains(u)))
                    .count();
                assert_eq!(non_redundant_subsets(&demand).len(), brute);
                assert_eq!(brute, (1 << k) - (1 << (k - distinct)));
            }
        }
    }

    #[test]
    fn demand_probabilities() {
        let i = inst(vec![0.6, 0.4], 2);
        assert!((demand_probability(&i, &d(&[1, 1], 2)) - 0.36).abs() < 1e-15);
        assert!((demand_probability(&i, &d(&[1, 2], 2)) - 0.24).abs() < 1e-15);
        let u = inst(vec![0.25; 4], 4);
        assert_eq!(demand_probability(&u, &d(&[1, 2, 3, 4], 4)), 0.25f64.powi(4));
    }

    #[test]
    fn class_weights() {
        let i = inst(vec![0.6, 0.4], 2);
        assert!((distinct_set_weight(&i, &[0]) - 0.36).abs() < 1e-15);
        assert!((distinct_set_weight(&i, &[0, 1]) - 0.48).abs() < 1e-15);
        assert_eq!(distinct_set_weight(&i, &[0, 1, 1]), 0.0);
        let classes = enumerate_demand_classes(&i).unwrap();
        let sets: Vec<_> = classes.iter().map(|c| c.distinct_set.clone()).collect();
        assert_eq!(sets, vec![vec![0], vec![1], vec![0, 1]]);
        for (c, w) in classes.iter().zip([0.36, 0.16, 0.48]) {
            assert!((c.weight - w).abs() < 1e-15);
        }
    }

    #[test]
    fn class_counts() {
        let one = inst(vec![1.0], 5);
        let classes = enumerate_demand_classes(&one).unwrap();
        assert_eq!(classes.len(), 1);
        assert!((classes[0].weight - 1.0).abs() < 1e-15);
        let four = inst(zipf_popularity(4, 0.8), 4);
        assert_eq!(enumerate_demand_classes(&four).unwrap().len(), 15);
    }

    #[test]
    fn zero_popularity_classes_are_dropped() {
        let i = inst(vec![0.5, 0.5, 0.0], 2);
        let classes = enumerate_demand_classes(&i).unwrap();
        assert!(classes.iter().all(|c| !c.distinct_set.contains(&2)));
        assert_eq!(classes.len(), 3);
    }

    #[test]
    fn weights_agree_and_sum_to_one() {
        for (n, k, theta) in [(2, 2, 0.3), (3, 4, 1.1), (4, 4, 1.4), (5, 3, 0.0), (6, 2, 2.0), (3, 6, 0.8)] {
            let i = inst(zipf_popularity(n, theta), k);
            let mut total = 0.0;
            for files in candidate_distinct_sets(n, k) {
                let a = distinct_set_weight(&i, &files);
                let b = distinct_set_weight_enumerated(&i, &files);
                assert!((a - b).abs() < 1e-12, "{files:?}: {a} vs {b}");
                total += a;
            }
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn representative_belongs_to_class() {
        let class = DemandClass { distinct_set: vec![1, 3], weight: 0.1 };
        let rep = class.representative(4);
        assert_eq!(rep.requests(), &[1, 3, 1, 1]);
        assert_eq!(distinct_set(&rep), vec![1, 3]);
    }

    #[test]
    fn enumeration_guard() {
        let big = inst(zipf_popularity(20, 1.0), 10);
        assert!(matches!(all_demands(&big), Err(Error::EnumerationLimit { .. })));
        assert!(enumerate_demand_classes(&big).is_err());
    }

    #[test]
    fn demand_order_is_lexicographic() {
        let i = inst(vec![0.5, 0.5], 2);
        let all: Vec<_> = all_demands(&i).unwrap().map(|d| d.labels()).collect();
        assert_eq!(all, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
    }

    #[test]
    fn class_members() {
        let members: Vec<_> = demands_in_class(3, &[0, 1]).map(|d| d.labels()).collect();
        assert_eq!(members.len(), 6);
        assert!(members.contains(&vec![1, 1, 2]));
    }
}
