//! Logical matrices and the semi-tensor product (STP).
//!
//! A logical matrix is an `N x Q` 0/1 matrix whose every column is a
//! canonical unit vector `delta_N^i`. We only ever store the column
//! indices (1-based, matching the `delta_N[i_1, ..., i_Q]` shorthand);
//! dense forms are never materialized.

use alloc::vec::Vec;

/// An `N x Q` matrix whose columns are canonical unit vectors, stored
/// as a 1-based column-index array.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalMatrix {
    rows: u32,
    col_index: Vec<u32>,
}

impl LogicalMatrix {
    /// Builds `delta_rows[col_index...]`. Panics if any entry is out of
    /// `1..=rows` or `rows == 0`.
    pub fn new(rows: u32, col_index: Vec<u32>) -> Self {
        assert!(rows > 0, "logical matrix must have at least one row");
        for (j, &i) in col_index.iter().enumerate() {
            assert!(
                i >= 1 && i <= rows,
                "column {} index {} out of range 1..={}",
                j + 1,
                i,
                rows
            );
        }
        LogicalMatrix { rows, col_index }
    }

    /// The identity matrix `I_n` as a logical matrix.
    pub fn identity(n: u32) -> Self {
        LogicalMatrix::new(n, (1..=n).collect())
    }

    /// The unit column vector `delta_n^i` as an `n x 1` logical matrix.
    pub fn unit(n: u32, i: u32) -> Self {
        LogicalMatrix::new(n, alloc::vec![i])
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.col_index.len() as u32
    }

    /// `Col_j`: the row index of the single 1 in column `j` (1-based).
    /// Panics if `j` is out of range.
    pub fn col(&self, j: u32) -> u32 {
        assert!(j >= 1 && j <= self.cols(), "column index {} out of range", j);
        self.col_index[(j - 1) as usize]
    }

    /// Raw 1-based column indices.
    pub fn col_indices(&self) -> &[u32] {
        &self.col_index
    }

    /// `Blk_k`: view of the k-th square block of an `N x MN` matrix.
    /// Zero-copy; panics if `cols` is not a multiple of `rows` or `k`
    /// is out of range.
    pub fn blk(&self, k: u32) -> BlockView<'_> {
        let n = self.rows;
        assert!(self.cols() % n == 0, "matrix is not square-blocked");
        let m = self.cols() / n;
        assert!(k >= 1 && k <= m, "block index {} out of range 1..={}", k, m);
        let start = ((k - 1) * n) as usize;
        BlockView {
            rows: n,
            cols: &self.col_index[start..start + n as usize],
        }
    }

    /// Semi-tensor product `self ⋉ other`, restricted to logical-matrix
    /// operands (under which the result is again a logical matrix).
    /// Computed directly on column indices.
    pub fn stp(&self, other: &LogicalMatrix) -> LogicalMatrix {
        let (qa, nb) = (self.cols() as u64, other.rows as u64);
        let s = lcm(qa, nb);
        // self ⊗ I_{t1} is (rows*t1) x s; other ⊗ I_{t2} is s x (cols*t2).
        let t1 = s / qa;
        let t2 = s / nb;
        let out_rows = self.rows as u64 * t1;
        let out_cols = other.cols() as u64 * t2;
        let mut col_index = Vec::with_capacity(out_cols as usize);
        for j in 1..=out_cols {
            // column j of (other ⊗ I_{t2})
            let qb = (j - 1) / t2 + 1;
            let r = (j - 1) % t2 + 1;
            let e = (other.col(qb as u32) as u64 - 1) * t2 + r;
            // row of the 1 in column e of (self ⊗ I_{t1})
            let qa_idx = (e - 1) / t1 + 1;
            let r1 = (e - 1) % t1 + 1;
            let out = (self.col(qa_idx as u32) as u64 - 1) * t1 + r1;
            col_index.push(out as u32);
        }
        LogicalMatrix::new(out_rows as u32, col_index)
    }
}

/// Zero-copy view of one square block of an `N x MN` logical matrix.
#[derive(Clone, Copy, Debug)]
pub struct BlockView<'a> {
    rows: u32,
    cols: &'a [u32],
}

impl<'a> BlockView<'a> {
    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn col(&self, i: u32) -> u32 {
        assert!(i >= 1 && i <= self.rows, "column index {} out of range", i);
        self.cols[(i - 1) as usize]
    }

    pub fn to_matrix(&self) -> LogicalMatrix {
        LogicalMatrix::new(self.rows, self.cols.to_vec())
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}
