use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::fields::VectorField3;
use crate::sparse::{CsrPattern, SparseMatrix};

/// A 3 x 3 grid of vertex-by-vertex blocks acting on [`VectorField3`].
///
/// Block `(i, j)` couples test component `i` with trial component `j`. All
/// blocks share one pattern.
#[derive(Debug, Clone)]
pub struct BlockOperator3 {
    blocks: Vec<SparseMatrix>,
}

impl BlockOperator3 {
    pub fn zeros(pattern: &Arc<CsrPattern>) -> Self {
        Self {
            blocks: (0..9)
                .map(|_| SparseMatrix::zeros(pattern.clone()))
                .collect(),
        }
    }

    /// `m` on every diagonal block.
    pub fn diagonal(m: &SparseMatrix) -> Self {
        let mut out = Self::zeros(m.pattern());
        for i in 0..3 {
            *out.block_mut(i, i) = m.clone();
        }
        out
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        self.blocks[0].pattern()
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn block(&self, i: usize, j: usize) -> &SparseMatrix {
        &self.blocks[3 * i + j]
    }

    pub fn block_mut(&mut self, i: usize, j: usize) -> &mut SparseMatrix {
        &mut self.blocks[3 * i + j]
    }

    pub fn apply(&self, u: &VectorField3) -> Result<VectorField3> {
        check_len(self.dim(), u.len())?;
        let mut out = VectorField3::zeros(u.len());
        for i in 0..3 {
            for j in 0..3 {
                let y = self.block(i, j).mul_vec(&u.components[j]);
                for (o, v) in out.components[i].iter_mut().zip(y) {
                    *o += v;
                }
            }
        }
        Ok(out)
    }

    /// `w^T A u`.
    pub fn bilinear(&self, w: &VectorField3, u: &VectorField3) -> Result<f64> {
        let au = self.apply(u)?;
        Ok((0..3)
            .map(|i| crate::fields::dot(&w.components[i], &au.components[i]))
            .sum())
    }

    pub fn add_scaled(&mut self, alpha: f64, other: &Self) -> Result<()> {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.add_scaled(alpha, b)?;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        for b in &mut self.blocks {
            b.scale(alpha);
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(|b| b.max_abs()).fold(0.0, f64::max)
    }

    /// Symmetry of the full 3V x 3V operator: block `(i, j)` against `(j, i)^T`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let bound = tol * self.max_abs();
        let p = self.pattern().clone();
        for i in 0..3 {
            for j in 0..3 {
                let a = self.block(i, j);
                let b = self.block(j, i);
                for r in 0..p.nrows() {
                    for (k, &c) in p.row(r).iter().enumerate() {
                        if (a.values()[p.row_ptr()[r] + k] - b.get(c, r)).abs() > bound {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Frobenius-like entry count check: every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.values().iter().all(|&v| v == 0.0))
    }

    /// `sum_k c_k A_k` written into the interleaved 3V x 3V matrix (row `3 a + i`).
    pub fn combine_interleaved(
        pattern3: &Arc<CsrPattern>,
        terms: &[(f64, &BlockOperator3)],
    ) -> Result<SparseMatrix> {
        let mut out = SparseMatrix::zeros(pattern3.clone());
        Self::combine_into(&mut out, terms)?;
        Ok(out)
    }

    /// In-place version of [`Self::combine_interleaved`] reusing `out`'s storage.
    pub fn combine_into(out: &mut SparseMatrix, terms: &[(f64, &BlockOperator3)]) -> Result<()> {
        let Some(first) = terms.first() else {
            return Err(Error::Parameter("empty operator combination".into()));
        };
        let p = first.1.pattern().clone();
        if out.nrows() != 3 * p.nrows() || out.nnz() != 9 * p.nnz() {
            return Err(Error::Dimension {
                expected: 9 * p.nnz(),
                found: out.nnz(),
            });
        }
        for (_, t) in terms {
            if !Arc::ptr_eq(t.pattern(), &p) && **t.pattern() != *p {
                return Err(Error::Parameter(
                    "block operators use different patterns".into(),
                ));
            }
        }
        let values = out.values_mut();
        values.fill(0.0);
        for a in 0..p.nrows() {
            let start = p.row_ptr()[a];
            let len = p.row_ptr()[a + 1] - start;
            for i in 0..3 {
                let base = 9 * start + 3 * i * len;
                for k in 0..len {
                    for j in 0..3 {
                        let mut s = 0.0;
                        for (c, t) in terms {
                            s += c * t.block(i, j).values()[start + k];
                        }
                        values[base + 3 * k + j] = s;
                    }
                }
            }
        }
        Ok(())
    }
}
