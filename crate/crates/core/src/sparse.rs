//! Compressed sparse row storage.
//!
//! All vertex-by-vertex operators on one mesh share a single [`CsrPattern`]
//! (vertex adjacency plus the diagonal), so blocks can be combined entrywise
//! without any index matching.

use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::mesh::SurfaceMesh;

/// Sparsity structure with sorted column indices in each row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrPattern {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl CsrPattern {
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
    ) -> Result<Self> {
        if row_ptr.len() != nrows + 1
            || row_ptr[0] != 0
            || *row_ptr.last().unwrap() != col_idx.len()
        {
            return Err(Error::Parameter("inconsistent CSR row pointers".into()));
        }
        for r in 0..nrows {
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if row_ptr[r] > row_ptr[r + 1]
                || cols.windows(2).any(|w| w[0] >= w[1])
                || cols.iter().any(|&c| c >= ncols)
            {
                return Err(Error::Parameter(format!(
                    "row {r} has unsorted or out-of-range columns"
                )));
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
        })
    }

    /// Vertex adjacency of `mesh` including the diagonal.
    pub fn from_mesh(mesh: &SurfaceMesh) -> Self {
        let n = mesh.num_vertices();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(n + 2 * mesh.num_edges());
        row_ptr.push(0);
        for v in 0..n {
            let start = col_idx.len();
            col_idx.push(v);
            col_idx.extend(mesh.neighbors(v));
            col_idx[start..].sort_unstable();
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows: n,
            ncols: n,
            row_ptr,
            col_idx,
        }
    }

    /// Pattern of the 3n x 3n matrix whose row `3 a + i` holds `(a, b)` blocks of
    /// this pattern, columns `3 b + j`.
    pub fn interleaved3(&self) -> Self {
        let mut row_ptr = Vec::with_capacity(3 * self.nrows + 1);
        let mut col_idx = Vec::with_capacity(9 * self.nnz());
        row_ptr.push(0);
        for a in 0..self.nrows {
            for _ in 0..3 {
                for &b in self.row(a) {
                    col_idx.extend([3 * b, 3 * b + 1, 3 * b + 2]);
                }
                row_ptr.push(col_idx.len());
            }
        }
        Self {
            nrows: 3 * self.nrows,
            ncols: 3 * self.ncols,
            row_ptr,
            col_idx,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Storage slot of `(r, c)`, if present.
    pub fn find(&self, r: usize, c: usize) -> Option<usize> {
        self.row(r)
            .binary_search(&c)
            .ok()
            .map(|k| self.row_ptr[r] + k)
    }
}

/// Row-compressed matrix over a shared pattern.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pattern: Arc<CsrPattern>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(pattern: Arc<CsrPattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        Self { pattern, values }
    }

    pub fn from_values(pattern: Arc<CsrPattern>, values: Vec<f64>) -> Result<Self> {
        check_len(pattern.nnz(), values.len())?;
        Ok(Self { pattern, values })
    }

    /// Sums duplicate entries.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for &(r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::Parameter(format!(
                    "triplet ({r}, {c}) outside {nrows} x {ncols}"
                )));
            }
            rows[r].push((c, v));
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let pattern = CsrPattern::new(nrows, ncols, row_ptr, col_idx)?;
        Ok(Self {
            pattern: Arc::new(pattern),
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        let pattern = CsrPattern {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
        };
        Self {
            pattern: Arc::new(pattern),
            values: vec![1.0; n],
        }
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        &self.pattern
    }

    pub fn nrows(&self) -> usize {
        self.pattern.nrows
    }

    pub fn ncols(&self) -> usize {
        self.pattern.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pattern.find(r, c).map_or(0.0, |k| self.values[k])
    }

    /// Adds `v` at `(r, c)`; the slot must exist in the pattern.
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let k = self
            .pattern
            .find(r, c)
            .unwrap_or_else(|| panic!("entry ({r}, {c}) is not in the sparsity pattern"));
        self.values[k] += v;
    }

    fn same_pattern(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.pattern, &other.pattern) || self.pattern == other.pattern
    }

    /// `self += alpha * other` on an identical pattern.
    pub fn add_scaled(&mut self, alpha: f64, other: &Self) -> Result<()> {
        if !self.same_pattern(other) {
            return Err(Error::Parameter("sparse patterns differ".into()));
        }
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        for v in &mut self.values {
            *v *= alpha;
        }
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols(), "matrix-vector dimension mismatch");
        assert_eq!(y.len(), self.nrows(), "matrix-vector dimension mismatch");
        let p = &*self.pattern;
        let row = |r: usize| -> f64 {
            let mut s = 0.0;
            for k in p.row_ptr[r]..p.row_ptr[r + 1] {
                s += self.values[k] * x[p.col_idx[k]];
            }
            s
        };
        #[cfg(feature = "parallel")]
        if y.len() >= 4096 {
            use rayon::prelude::*;
            y.par_iter_mut()
                .enumerate()
                .for_each(|(r, out)| *out = row(r));
            return;
        }
        for (r, out) in y.iter_mut().enumerate() {
            *out = row(r);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.mul_vec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows().min(self.ncols()))
            .map(|r| self.get(r, r))
            .collect()
    }

    /// Row sums, i.e. `A 1`.
    pub fn row_sums(&self) -> Vec<f64> {
        let p = &*self.pattern;
        (0..self.nrows())
            .map(|r| self.values[p.row_ptr[r]..p.row_ptr[r + 1]].iter().sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A - A^T| <= tol * max |A|`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.nrows() != self.ncols() {
            return false;
        }
        let bound = tol * self.max_abs();
        let p = &*self.pattern;
        (0..self.nrows()).all(|r| {
            (p.row_ptr[r]..p.row_ptr[r + 1])
                .all(|k| (self.values[k] - self.get(p.col_idx[k], r)).abs() <= bound)
        })
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows(), self.ncols());
        let p = &*self.pattern;
        for r in 0..self.nrows() {
            for k in p.row_ptr[r]..p.row_ptr[r + 1] {
                m[(r, p.col_idx[k])] += self.values[k];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_torus;
    use proptest::prelude::*;

    #[test]
    fn mesh_pattern_has_diagonal_and_neighbours() {
        let mesh = generate_torus(2.0, 0.5, 6, 4).unwrap();
        let p = CsrPattern::from_mesh(&mesh);
        assert_eq!(p.nnz(), mesh.num_vertices() + 2 * mesh.num_edges());
        for v in 0..mesh.num_vertices() {
            assert!(p.find(v, v).is_some());
            for w in mesh.neighbors(v) {
                assert!(p.find(v, w).is_some());
            }
        }
    }

    #[test]
    fn interleaved_layout() {
        let mesh = generate_torus(2.0, 0.5, 5, 3).unwrap();
        let p = CsrPattern::from_mesh(&mesh);
        let q = p.interleaved3();
        assert_eq!(q.nnz(), 9 * p.nnz());
        for a in 0..p.nrows() {
            for i in 0..3 {
                let start = q.row_ptr()[3 * a + i];
                assert_eq!(start, 9 * p.row_ptr()[a] + 3 * i * p.row(a).len());
                for (k, &b) in p.row(a).iter().enumerate() {
                    for j in 0..3 {
                        assert_eq!(q.col_idx()[start + 3 * k + j], 3 * b + j);
                    }
                }
            }
        }
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = SparseMatrix::from_triplets(
            2,
            3,
            &[(0, 2, 1.0), (0, 2, 2.0), (1, 0, -1.0), (0, 0, 4.0)],
        )
        .unwrap();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(0, 2), 3.0);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]), vec![7.0, -1.0]);
        assert!(SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn symmetry_check() {
        let s =
            SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0), (0, 0, 2.0)]).unwrap();
        assert!(s.is_symmetric(1e-12));
        let u = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 0, 2.0)]).unwrap();
        assert!(!u.is_symmetric(1e-12));
    }

    proptest! {
        #[test]
        fn matvec_matches_dense(entries in prop::collection::vec((0usize..7, 0usize..5, -10.0f64..10.0), 0..40),
                                x in prop::collection::vec(-5.0f64..5.0, 5)) {
            let m = SparseMatrix::from_triplets(7, 5, &entries).unwrap();
            let dense = m.to_dense();
            let y = m.mul_vec(&x);
            let yd = &dense * nalgebra::DVector::from_vec(x.clone());
            for r in 0..7 {
                prop_assert!((y[r] - yd[r]).abs() < 1e-10);
            }
        }
    }
}
