//! Gauss–Jordan elimination over GF(2) with bit-string right-hand sides.
//!
//! Each equation says that the XOR of a set of unknown bit strings equals a
//! known bit string; all strings in one system have the same length, so a
//! system stands for that many independent scalar systems sharing one
//! coefficient matrix.

use super::bits::BitString;

#[derive(Debug, Clone)]
struct Row {
    coefficients: Vec<u64>,
    rhs: BitString,
}

impl Row {
    #[inline]
    fn has(&self, col: usize) -> bool {
        self.coefficients[col / 64] >> (col % 64) & 1 == 1
    }

    fn xor_with(&mut self, other: &Row) {
        for (a, b) in self.coefficients.iter_mut().zip(&other.coefficients) {
            *a ^= b;
        }
        self.rhs.xor_prefix(&other.rhs);
    }

    fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&w| w == 0)
    }
}

#[derive(Debug, Clone)]
pub struct Gf2System {
    n_cols: usize,
    width: usize,
    rows: Vec<Row>,
}

/// Reduced system: which unknowns are pinned down and to what.
#[derive(Debug, Clone)]
pub struct Gf2Solution {
    values: Vec<Option<BitString>>,
    pub inconsistent_rows: usize,
}

impl Gf2Solution {
    /// Value of `col` when the equations determine it uniquely.
    pub fn value(&self, col: usize) -> Option<&BitString> {
        self.values[col].as_ref()
    }
}

impl Gf2System {
    /// A system over `n_cols` unknowns of `width` bits each.
    pub fn new(n_cols: usize, width: usize) -> Self {
        Self { n_cols, width, rows: Vec::new() }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds `XOR_{c in cols} x_c = rhs`. Repeated columns cancel.
    pub fn add_equation(&mut self, cols: impl IntoIterator<Item = usize>, rhs: BitString) {
        assert_eq!(rhs.len(), self.width);
        let mut coefficients = vec![0u64; self.n_cols.div_ceil(64)];
        for c in cols {
            assert!(c < self.n_cols);
            coefficients[c / 64] ^= 1 << (c % 64);
        }
        self.rows.push(Row { coefficients, rhs });
    }

    pub fn solve(mut self) -> Gf2Solution {
        let mut pivot_row_of = vec![None; self.n_cols];
        let mut next = 0;
        for (col, pivot_row) in pivot_row_of.iter_mut().enumerate() {
            let Some(found) = (next..self.rows.len()).find(|&r| self.rows[r].has(col)) else {
                continue;
            };
            self.rows.swap(next, found);
            let pivot = self.rows[next].clone();
            for (r, row) in self.rows.iter_mut().enumerate() {
                if r != next && row.has(col) {
                    row.xor_with(&pivot);
                }
            }
            *pivot_row = Some(next);
            next += 1;
        }

        let inconsistent_rows = self.rows[next..].iter().filter(|r| r.is_zero() && !r.rhs.is_zero()).count();

        let values = pivot_row_of
            .iter()
            .enumerate()
            .map(|(col, pivot)| {
                let row = &self.rows[(*pivot)?];
                // determined only if no free column remains in the pivot row
                let alone = row
                    .coefficients
                    .iter()
                    .enumerate()
                    .all(|(w, &bits)| bits == if w == col / 64 { 1 << (col % 64) } else { 0 });
                alone.then(|| row.rhs.clone())
            })
            .collect();
        Gf2Solution { values, inconsistent_rows }
    }
}
