//! Minimal compressed-column sparse matrix.
//!
//! Superoperators are assembled as coordinate triplets and compressed once;
//! the steady-state solver hands the same storage to the sparse LU backend.

use num_complex::Complex64 as C64;

/// Square compressed-column matrix.
#[derive(Debug, Clone)]
pub struct CscMatrix {
    dim: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<C64>,
}

impl CscMatrix {
    /// Compress triplets; duplicate entries are summed.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, C64)]) -> Self {
        let mut count = vec![0usize; dim + 1];
        for &(_, c, _) in triplets {
            count[c + 1] += 1;
        }
        for c in 0..dim {
            count[c + 1] += count[c];
        }
        let mut row_idx = vec![0usize; triplets.len()];
        let mut values = vec![C64::from(0.0); triplets.len()];
        let mut cursor = count.clone();
        for &(r, c, v) in triplets {
            let k = cursor[c];
            row_idx[k] = r;
            values[k] = v;
            cursor[c] += 1;
        }
        // sort rows within each column and merge duplicates
        let mut out_ptr = vec![0usize; dim + 1];
        let mut out_rows = Vec::with_capacity(triplets.len());
        let mut out_vals = Vec::with_capacity(triplets.len());
        let mut scratch: Vec<(usize, C64)> = Vec::new();
        for c in 0..dim {
            scratch.clear();
            for k in count[c]..count[c + 1] {
                scratch.push((row_idx[k], values[k]));
            }
            scratch.sort_by_key(|&(r, _)| r);
            let mut i = 0;
            while i < scratch.len() {
                let r = scratch[i].0;
                let mut v = scratch[i].1;
                let mut j = i + 1;
                while j < scratch.len() && scratch[j].0 == r {
                    v += scratch[j].1;
                    j += 1;
                }
                out_rows.push(r);
                out_vals.push(v);
                i = j;
            }
            out_ptr[c + 1] = out_rows.len();
        }
        Self {
            dim,
            col_ptr: out_ptr,
            row_idx: out_rows,
            values: out_vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        y.fill(C64::from(0.0));
        for c in 0..self.dim {
            let xc = x[c];
            if xc == C64::from(0.0) {
                continue;
            }
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[k]] += self.values[k] * xc;
            }
        }
    }

    /// `y = A^dag x` (conjugate transpose product).
    pub fn matvec_dagger(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for c in 0..self.dim {
            let mut acc = C64::from(0.0);
            for k in self.col_ptr[c]..self.col_ptr[c + 1] {
                acc += self.values[k].conj() * x[self.row_idx[k]];
            }
            y[c] = acc;
        }
    }

    /// Entrywise 1-norm of `A x`.
    pub fn residual_one_norm(&self, x: &[C64]) -> f64 {
        let mut y = vec![C64::from(0.0); self.dim];
        self.matvec(x, &mut y);
        y.iter().map(|z| z.norm()).sum()
    }

    /// Iterate stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1])
                .map(move |k| (self.row_idx[k], c, self.values[k]))
        })
    }

    /// Sum of the entry magnitudes in each column's trace positions is not
    /// needed; instead expose the per-column iterator for checks.
    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.row_idx[k], self.values[k]))
    }
}
