use std::ops::Range;

use serde::Serialize;

use crate::combinatorics::{binomial, UserSubset};
use crate::error::{Error, Result};
use crate::model::{require_valid, Placement, ProblemInstance};

/// Largest user count for which per-subset bit ranges are tabulated.
pub const MAX_SIMULATED_USERS: usize = 16;

/// Default file size: `2^K * 1024` bits.
pub fn default_file_bits(k_users: usize) -> u64 {
    1024u64 << k_users
}

/// Integer subfile sizes and the bit range each subfile occupies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubfileLayout {
    file_size_bits: u64,
    k_users: usize,
    /// `subfile_bits[n][l]`: length of every subfile of file `n` cached by
    /// exactly `l` users.
    subfile_bits: Vec<Vec<u64>>,
    #[serde(skip)]
    offsets: Vec<Vec<u64>>,
}

impl SubfileLayout {
    /// Builds a layout from explicit integer sizes; each row must partition
    /// `file_size_bits` exactly.
    pub fn from_sizes(file_size_bits: u64, k_users: usize, subfile_bits: Vec<Vec<u64>>) -> Result<Self> {
        if k_users == 0 || k_users > MAX_SIMULATED_USERS {
            return Err(Error::OutOfRange(format!(
                "simulation supports 1..={MAX_SIMULATED_USERS} users, got {k_users}"
            )));
        }
        for (n, row) in subfile_bits.iter().enumerate() {
            if row.len() != k_users + 1 {
                return Err(Error::Quantization(format!(
                    "file {n} has {} levels, expected {}",
                    row.len(),
                    k_users + 1
                )));
            }
            let total: u128 =
                row.iter().enumerate().map(|(l, &s)| binomial(k_users as i64, l as i64) as u128 * s as u128).sum();
            if total != file_size_bits as u128 {
                return Err(Error::Quantization(format!(
                    "subfiles of file {n} cover {total} bits, file has {file_size_bits}"
                )));
            }
        }
        let offsets = subfile_bits
            .iter()
            .map(|row| {
                let mut acc = 0;
                let mut table = Vec::with_capacity((1 << k_users) + 1);
                table.push(0);
                for mask in 0..1u32 << k_users {
                    acc += row[mask.count_ones() as usize];
                    table.push(acc);
                }
                table
            })
            .collect();
        Ok(Self { file_size_bits, k_users, subfile_bits, offsets })
    }

    pub fn file_size_bits(&self) -> u64 {
        self.file_size_bits
    }

    pub fn k_users(&self) -> usize {
        self.k_users
    }

    pub fn n_files(&self) -> usize {
        self.subfile_bits.len()
    }

    pub fn subfile_bits(&self) -> &[Vec<u64>] {
        &self.subfile_bits
    }

    /// Length of a subfile of `file` at subset size `level`.
    pub fn subfile_len(&self, file: usize, level: usize) -> u64 {
        self.subfile_bits[file][level]
    }

    /// Bits of `file` stored for `subset`. Ranges are laid out in bitmask
    /// order of the subsets and tile `0..F`.
    pub fn subfile_range(&self, file: usize, subset: UserSubset) -> Range<u64> {
        let mask = subset.0 as usize;
        self.offsets[file][mask]..self.offsets[file][mask + 1]
    }
}

/// Turns a fractional placement into integer subfile sizes.
///
/// Levels below `K` get `a * F` rounded down (snapped to the nearest integer
/// when within numerical noise of it); the remaining bits of each file go to
/// its single subfile cached by every user. Sizes stay uniform within a
/// level and each differs from `a * F` by less than one bit except at level
/// `K`, which is never transmitted.
pub fn quantize_placement(
    instance: &ProblemInstance,
    placement: &Placement,
    file_size_bits: u64,
) -> Result<SubfileLayout> {
    require_valid(instance, placement, false)?;
    let k = instance.k_users();
    if k > MAX_SIMULATED_USERS {
        return Err(Error::OutOfRange(format!("simulation supports at most {MAX_SIMULATED_USERS} users")));
    }
    if file_size_bits < 1 << k {
        return Err(Error::OutOfRange(format!("file size {file_size_bits} bits is below 2^K = {}", 1u64 << k)));
    }
    let f = file_size_bits as f64;
    let snap = (1e-9 * f).max(1e-6);
    let coefficient = |l: usize| binomial(k as i64, l as i64) as i128;

    let mut rows = Vec::with_capacity(placement.n_files());
    for n in 0..placement.n_files() {
        let mut row: Vec<u64> = (0..k)
            .map(|l| {
                let x = placement.get(n, l).max(0.0) * f;
                let nearest = x.round();
                (if (x - nearest).abs() <= snap { nearest } else { x.floor() }) as u64
            })
            .collect();
        let mut rest = file_size_bits as i128 - (0..k).map(|l| coefficient(l) * row[l] as i128).sum::<i128>();
        while rest < 0 {
            // give bits back from the cheapest nonempty level
            let Some(l) = (0..k).filter(|&l| row[l] > 0).min_by_key(|&l| coefficient(l)) else {
                return Err(Error::Quantization(format!("file {n} cannot be split into {file_size_bits} bits")));
            };
            row[l] -= 1;
            rest += coefficient(l);
        }
        row.push(rest as u64);
        rows.push(row);
    }
    SubfileLayout::from_sizes(file_size_bits, k, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance(m: f64) -> ProblemInstance {
        ProblemInstance::new(2, 2, m, vec![0.6, 0.4]).unwrap()
    }

    #[test]
    fn half_split_at_k2() {
        let a = Placement::from_rows(vec![vec![0.0, 0.5, 0.0]; 2]).unwrap();
        let layout = quantize_placement(&instance(1.0), &a, 8).unwrap();
        assert_eq!(layout.subfile_bits(), &[vec![0, 4, 0], vec![0, 4, 0]]);
        assert_eq!(layout.subfile_range(0, UserSubset::from_users([0])), 0..4);
        assert_eq!(layout.subfile_range(0, UserSubset::from_users([1])), 4..8);
        assert!(layout.subfile_range(0, UserSubset::all(2)).is_empty());
    }

    #[test]
    fn endpoints() {
        let full = quantize_placement(&instance(2.0), &Placement::fully_cached(2, 2), 16).unwrap();
        assert_eq!(full.subfile_bits()[0], vec![0, 0, 16]);
        assert_eq!(full.subfile_range(1, UserSubset::all(2)), 0..16);
        let none = quantize_placement(&instance(0.0), &Placement::uncached(2, 2), 16).unwrap();
        assert_eq!(none.subfile_bits()[1], vec![16, 0, 0]);
    }

    #[test]
    fn residue_lands_in_top_level() {
        let third = 1.0 / 3.0;
        let a = Placement::from_rows(vec![vec![third, third / 2.0, third]; 2]).unwrap();
        let layout = quantize_placement(&instance(1.0), &a, 16).unwrap();
        // floor(16/3) = 5, floor(8/3) = 2, 16 - 5 - 2*2 = 7
        assert_eq!(layout.subfile_bits()[0], vec![5, 2, 7]);
    }

    #[test]
    fn rejects_tiny_files() {
        let a = Placement::uncached(2, 2);
        assert!(matches!(quantize_placement(&instance(0.0), &a, 3), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn from_sizes_checks_partition() {
        assert!(SubfileLayout::from_sizes(8, 2, vec![vec![1, 3, 0]]).is_err());
        assert!(SubfileLayout::from_sizes(8, 2, vec![vec![2, 3, 0]]).is_ok());
    }
}
