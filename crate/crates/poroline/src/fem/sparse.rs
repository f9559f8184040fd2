//! Triplet-based sparse matrix with CSR conversion, used by the assemblers
//! and handed to the direct solvers.

use crate::error::{Error, Result};

/// Sparse matrix in accumulating triplet form. Duplicate entries add.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            triplets: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            triplets: Vec::with_capacity(cap),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != 0.0 {
            self.triplets.push((row, col, value));
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            triplets: self.triplets.iter().map(|&(i, j, v)| (j, i, v)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> SparseMatrix {
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            triplets: self
                .triplets
                .iter()
                .map(|&(i, j, v)| (i, j, v * s))
                .collect(),
        }
    }

    /// Compressed form with duplicates merged.
    pub fn to_csr(&self) -> CsrMatrix {
        let mut row_counts = vec![0usize; self.nrows + 1];
        for &(i, _, _) in &self.triplets {
            row_counts[i + 1] += 1;
        }
        for i in 0..self.nrows {
            row_counts[i + 1] += row_counts[i];
        }
        let nnz = self.triplets.len();
        let mut cols = vec![0usize; nnz];
        let mut vals = vec![0f64; nnz];
        let mut cursor = row_counts.clone();
        for &(i, j, v) in &self.triplets {
            let slot = cursor[i];
            cols[slot] = j;
            vals[slot] = v;
            cursor[i] += 1;
        }
        // sort each row by column, merge duplicates
        let mut out_ptr = vec![0usize; self.nrows + 1];
        let mut out_cols = Vec::with_capacity(nnz);
        let mut out_vals = Vec::with_capacity(nnz);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..self.nrows {
            scratch.clear();
            for k in row_counts[i]..row_counts[i + 1] {
                scratch.push((cols[k], vals[k]));
            }
            scratch.sort_unstable_by_key(|&(c, _)| c);
            let mut iter = scratch.iter().copied();
            if let Some((mut cur_col, mut cur_val)) = iter.next() {
                for (c, v) in iter {
                    if c == cur_col {
                        cur_val += v;
                    } else {
                        out_cols.push(cur_col);
                        out_vals.push(cur_val);
                        cur_col = c;
                        cur_val = v;
                    }
                }
                out_cols.push(cur_col);
                out_vals.push(cur_val);
            }
            out_ptr[i + 1] = out_cols.len();
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: out_ptr,
            cols: out_cols,
            vals: out_vals,
        }
    }

    /// Largest |A - Aᵀ| entry relative to the largest |A| entry.
    pub fn asymmetry(&self) -> f64 {
        let a = self.to_csr();
        let at = self.transpose().to_csr();
        let mut max_entry = 0f64;
        for &v in &a.vals {
            max_entry = max_entry.max(v.abs());
        }
        if max_entry == 0.0 {
            return 0.0;
        }
        let mut max_diff = 0f64;
        for i in 0..self.nrows {
            let ra = a.row(i);
            let rt = at.row(i);
            // merged walk over the two sorted rows
            let (mut p, mut q) = (0, 0);
            while p < ra.0.len() || q < rt.0.len() {
                let ca = ra.0.get(p).copied().unwrap_or(usize::MAX);
                let ct = rt.0.get(q).copied().unwrap_or(usize::MAX);
                if ca == ct {
                    max_diff = max_diff.max((ra.1[p] - rt.1[q]).abs());
                    p += 1;
                    q += 1;
                } else if ca < ct {
                    max_diff = max_diff.max(ra.1[p].abs());
                    p += 1;
                } else {
                    max_diff = max_diff.max(rt.1[q].abs());
                    q += 1;
                }
            }
        }
        max_diff / max_entry
    }

    /// Symmetric elimination of Dirichlet rows/columns: eliminated rows and
    /// columns are zeroed, the diagonal set to 1, and the right-hand side
    /// corrected so that constrained dofs take their prescribed values.
    pub fn apply_dirichlet(&mut self, rhs: &mut [f64], constrained: &[bool], values: &[f64]) {
        assert_eq!(rhs.len(), self.nrows);
        assert_eq!(constrained.len(), self.nrows);
        let mut kept = Vec::with_capacity(self.triplets.len());
        for &(i, j, v) in &self.triplets {
            match (constrained[i], constrained[j]) {
                (false, false) => kept.push((i, j, v)),
                (false, true) => rhs[i] -= v * values[j],
                _ => {}
            }
        }
        for (i, &c) in constrained.iter().enumerate() {
            if c {
                kept.push((i, i, 1.0));
                rhs[i] = values[i];
            }
        }
        self.triplets = kept;
    }

    /// Assembles scaled blocks into one larger matrix.
    pub fn from_blocks(
        nrows: usize,
        ncols: usize,
        blocks: &[(usize, usize, f64, &SparseMatrix)],
    ) -> SparseMatrix {
        let cap = blocks.iter().map(|b| b.3.triplets.len()).sum();
        let mut out = SparseMatrix::with_capacity(nrows, ncols, cap);
        for &(ro, co, scale, m) in blocks {
            assert!(ro + m.nrows <= nrows && co + m.ncols <= ncols);
            for &(i, j, v) in &m.triplets {
                out.add(ro + i, co + j, scale * v);
            }
        }
        out
    }
}

/// Compressed sparse row form; immutable.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.cols[lo..hi], &self.vals[lo..hi])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            y[i] = acc;
        }
        y
    }

    /// y += scale * A x
    pub fn matvec_add(&self, x: &[f64], scale: f64, y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            y[i] += scale * acc;
        }
    }

    /// y += scale * Aᵀ x
    pub fn matvec_transpose_add(&self, x: &[f64], scale: f64, y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                y[*c] += scale * v * x[i];
            }
        }
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }
}

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean distance between two vectors.
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Residual check helper: verifies ‖Ax - b‖ ≤ tol·max(‖b‖, floor).
pub fn check_residual(a: &CsrMatrix, x: &[f64], b: &[f64], tol: f64) -> Result<f64> {
    let mut r = a.matvec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri -= bi;
    }
    let rn = norm2(&r);
    let bn = norm2(b);
    let bound = tol * bn.max(f64::MIN_POSITIVE);
    if bn > 0.0 && rn > bound {
        return Err(Error::ResidualTooLarge {
            achieved: rn,
            required: bound,
        });
    }
    Ok(rn)
}
