//! Problem instance, file popularity and placement representation.
//!
//! Files and users are indexed from zero inside the library. File `0` is
//! always the most popular one: [`ProblemInstance::new`] sorts the supplied
//! popularity vector and keeps the permutation so results can be mapped back
//! to the caller's labels.

use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial;
use crate::error::{Error, Result};

/// Absolute tolerance for every placement constraint check.
pub const TOLERANCE: f64 = 1e-7;

/// Tolerance on the popularity vector summing to one.
pub const POPULARITY_SUM_TOLERANCE: f64 = 1e-12;

/// Largest number of users supported by the bitmask subset representation.
pub const MAX_USERS: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemInstance {
    n_files: usize,
    k_users: usize,
    cache_size: f64,
    popularity: Vec<f64>,
    /// `permutation[i]` is the caller's index of the file stored at sorted index `i`.
    permutation: Vec<usize>,
}

impl ProblemInstance {
    /// Validates the arguments and sorts the popularity vector into
    /// nonincreasing order. Ties keep their original relative order.
    pub fn new(n_files: usize, k_users: usize, cache_size: f64, popularity: Vec<f64>) -> Result<Self> {
        if n_files == 0 {
            return Err(Error::instance("number of files must be positive"));
        }
        if k_users == 0 {
            return Err(Error::instance("number of users must be positive"));
        }
        if k_users > MAX_USERS {
            return Err(Error::instance(format!("at most {MAX_USERS} users are supported, got {k_users}")));
        }
        if popularity.len() != n_files {
            return Err(Error::instance(format!("popularity has {} entries for {} files", popularity.len(), n_files)));
        }
        if !cache_size.is_finite() || cache_size < 0.0 || cache_size > n_files as f64 {
            return Err(Error::instance(format!("cache size {cache_size} outside [0, {n_files}]")));
        }
        if let Some((i, p)) = popularity.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0) {
            return Err(Error::instance(format!("popularity of file {} is {p}", i + 1)));
        }
        let sum: f64 = popularity.iter().sum();
        if (sum - 1.0).abs() > POPULARITY_SUM_TOLERANCE {
            return Err(Error::instance(format!("popularity sums to {sum}, not 1")));
        }

        let mut permutation: Vec<usize> = (0..n_files).collect();
        // stable: tied files keep their input order
        permutation.sort_by(|&i, &j| popularity[j].total_cmp(&popularity[i]));
        let sorted = permutation.iter().map(|&i| popularity[i]).collect();

        Ok(Self { n_files, k_users, cache_size, popularity: sorted, permutation })
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn k_users(&self) -> usize {
        self.k_users
    }

    pub fn cache_size(&self) -> f64 {
        self.cache_size
    }

    /// Popularity in nonincreasing order.
    pub fn popularity(&self) -> &[f64] {
        &self.popularity
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Same files and users with a different cache size.
    pub fn with_cache_size(&self, cache_size: f64) -> Result<Self> {
        if !cache_size.is_finite() || cache_size < 0.0 || cache_size > self.n_files as f64 {
            return Err(Error::instance(format!("cache size {cache_size} outside [0, {}]", self.n_files)));
        }
        Ok(Self { cache_size, ..self.clone() })
    }
}

/// Zipf popularity `p_n = n^-theta / sum_i i^-theta`.
pub fn zipf_popularity(n_files: usize, theta: f64) -> Vec<f64> {
    let weights: Vec<f64> = (1..=n_files).map(|n| (n as f64).powf(-theta)).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Per-file subfile sizes `a[n][l]` as fractions of the file size.
///
/// Row `n` holds the sizes for file `n`; column `l` is the size of each
/// subfile intended for a user subset of size `l` (`l = 0` is kept only at
/// the server).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Placement {
    n_files: usize,
    levels: usize,
    values: Vec<f64>,
}

impl Placement {
    pub fn zeros(n_files: usize, k_users: usize) -> Self {
        Self { n_files, levels: k_users + 1, values: vec![0.0; n_files * (k_users + 1)] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_files = rows.len();
        let levels = rows.first().map_or(0, Vec::len);
        if n_files == 0 || levels == 0 {
            return Err(Error::Config("placement must have at least one row and one column".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != levels) {
            return Err(Error::DimensionMismatch {
                expected_rows: n_files,
                expected_cols: levels,
                found_rows: n_files,
                found_cols: bad.len(),
            });
        }
        Ok(Self { n_files, levels, values: rows.into_iter().flatten().collect() })
    }

    /// Builds a placement from a row-major slice of length `n_files * (k_users + 1)`.
    pub fn from_flat(n_files: usize, k_users: usize, values: &[f64]) -> Result<Self> {
        let levels = k_users + 1;
        if values.len() != n_files * levels {
            return Err(Error::DimensionMismatch {
                expected_rows: n_files,
                expected_cols: levels,
                found_rows: values.len() / levels.max(1),
                found_cols: levels,
            });
        }
        Ok(Self { n_files, levels, values: values.to_vec() })
    }

    /// Every file kept entirely at the server (`a[n][0] = 1`).
    pub fn uncached(n_files: usize, k_users: usize) -> Self {
        let mut p = Self::zeros(n_files, k_users);
        for n in 0..n_files {
            p.set(n, 0, 1.0);
        }
        p
    }

    /// Every file stored entirely at every user (`a[n][K] = 1`).
    pub fn fully_cached(n_files: usize, k_users: usize) -> Self {
        let mut p = Self::zeros(n_files, k_users);
        for n in 0..n_files {
            p.set(n, k_users, 1.0);
        }
        p
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    /// Number of subset sizes, `K + 1`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn get(&self, file: usize, level: usize) -> f64 {
        self.values[file * self.levels + level]
    }

    #[inline]
    pub fn set(&mut self, file: usize, level: usize, value: f64) {
        self.values[file * self.levels + level] = value;
    }

    pub fn row(&self, file: usize) -> &[f64] {
        &self.values[file * self.levels..(file + 1) * self.levels]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.levels).map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn check_dimensions(&self, instance: &ProblemInstance) -> Result<()> {
        if self.n_files != instance.n_files() || self.levels != instance.k_users() + 1 {
            return Err(Error::DimensionMismatch {
                expected_rows: instance.n_files(),
                expected_cols: instance.k_users() + 1,
                found_rows: self.n_files,
                found_cols: self.levels,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for Placement {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<Placement> for Vec<Vec<f64>> {
    fn from(p: Placement) -> Self {
        p.to_rows()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub partition_ok: Vec<bool>,
    pub cache_ok: bool,
    pub nonneg_ok: bool,
    /// Always `true` when the popularity-first check was not requested.
    pub popularity_first_ok: bool,
    pub worst_violation: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.partition_ok.iter().all(|&ok| ok) && self.cache_ok && self.nonneg_ok && self.popularity_first_ok
    }
}

/// Checks the file partition, cache and nonnegativity constraints and,
/// optionally, the popularity-first ordering `a[n][l] >= a[n+1][l]` for
/// `l = 1..K`.
pub fn validate_placement(
    instance: &ProblemInstance,
    placement: &Placement,
    check_popularity_first: bool,
) -> Result<ValidationReport> {
    placement.check_dimensions(instance)?;
    let k = instance.k_users();
    let mut worst: f64 = 0.0;

    let mut nonneg_ok = true;
    for &v in placement.as_flat() {
        let violation = -v;
        worst = worst.max(violation);
        if violation > TOLERANCE || !v.is_finite() {
            nonneg_ok = false;
        }
    }

    let partition_ok = (0..instance.n_files())
        .map(|n| {
            let total: f64 = (0..=k).map(|l| binomial(k as i64, l as i64) as f64 * placement.get(n, l)).sum();
            let violation = (total - 1.0).abs();
            worst = worst.max(violation);
            violation <= TOLERANCE
        })
        .collect();

    let used = cache_usage(placement, k);
    let cache_violation = used - instance.cache_size();
    worst = worst.max(cache_violation);
    let cache_ok = cache_violation <= TOLERANCE;

    let mut popularity_first_ok = true;
    if check_popularity_first {
        let violation = popularity_first_violation(placement);
        worst = worst.max(violation);
        popularity_first_ok = violation <= TOLERANCE;
    }

    Ok(ValidationReport { partition_ok, cache_ok, nonneg_ok, popularity_first_ok, worst_violation: worst })
}

/// Fraction of the cache (in files) a user spends on `placement`.
pub fn cache_usage(placement: &Placement, k_users: usize) -> f64 {
    (0..placement.n_files())
        .map(|n| {
            (1..=k_users).map(|l| binomial(k_users as i64 - 1, l as i64 - 1) as f64 * placement.get(n, l)).sum::<f64>()
        })
        .sum()
}

/// Largest `a[n+1][l] - a[n][l]` over `l >= 1`, clamped at zero.
pub fn popularity_first_violation(placement: &Placement) -> f64 {
    let mut worst: f64 = 0.0;
    for n in 1..placement.n_files() {
        for l in 1..placement.levels() {
            worst = worst.max(placement.get(n, l) - placement.get(n - 1, l));
        }
    }
    worst
}

/// Fails unless `placement` satisfies every constraint (and, if asked, the
/// popularity-first ordering) at [`TOLERANCE`].
pub(crate) fn require_valid(instance: &ProblemInstance, placement: &Placement, popularity_first: bool) -> Result<()> {
    let report = validate_placement(instance, placement, false)?;
    if !report.is_valid() {
        return Err(Error::InvalidPlacement { worst_violation: report.worst_violation });
    }
    if popularity_first {
        let violation = popularity_first_violation(placement);
        if violation > TOLERANCE {
            return Err(Error::NotPopularityFirst { worst_violation: violation });
        }
    }
    Ok(())
}

/// Popularity as written in an instance file: explicit or Zipf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PopularitySpec {
    Explicit(Vec<f64>),
    Zipf { zipf_theta: f64 },
}

/// JSON instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub n_files: usize,
    pub k_users: usize,
    pub cache_size: f64,
    pub popularity: PopularitySpec,
}

impl InstanceConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_instance(&self) -> Result<ProblemInstance> {
        let popularity = match &self.popularity {
            PopularitySpec::Explicit(p) => p.clone(),
            PopularitySpec::Zipf { zipf_theta } => {
                if !zipf_theta.is_finite() || *zipf_theta < 0.0 {
                    return Err(Error::instance(format!("zipf theta {zipf_theta} must be >= 0")));
                }
                zipf_popularity(self.n_files, *zipf_theta)
            }
        };
        ProblemInstance::new(self.n_files, self.k_users, self.cache_size, popularity)
    }
}
