//! Compressed sparse row storage with a fixed pattern.

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Zero matrix whose pattern is the union of the dense blocks `dofs × dofs`
    /// over every entry of `blocks` (one block per cell).
    pub fn from_blocks<'a>(n: usize, blocks: impl IntoIterator<Item = &'a [usize]>) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for dofs in blocks {
            for &i in dofs {
                rows[i].extend_from_slice(dofs);
            }
        }
        Self::from_rows(n, n, rows)
    }

    /// Zero matrix with the given (unsorted, possibly repeated) column lists per row.
    pub fn from_rows(nrows: usize, ncols: usize, mut rows: Vec<Vec<usize>>) -> Self {
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let values = vec![T::zero(); col_idx.len()];
        CsrMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut rows = vec![Vec::new(); nrows];
        for &(i, j, _) in triplets {
            rows[i].push(j);
        }
        let mut m = Self::from_rows(nrows, ncols, rows);
        for &(i, j, v) in triplets {
            m.add(i, j, v);
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, T::one())).collect();
        Self::from_triplets(n, n, &triplets)
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

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn row_mut(&mut self, i: usize) -> (&[usize], &mut [T]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[range.clone()], &mut self.values[range])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.col_idx[start..self.row_ptr[i + 1]].binary_search(&j).ok().map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.position(i, j).map_or(T::zero(), |k| self.values[k])
    }

    /// Adds `v` to an entry of the pattern; panics outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let k = self.position(i, j).unwrap_or_else(|| panic!("entry ({i}, {j}) outside sparsity pattern"));
        self.values[k] += v;
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        self.nrows == other.nrows && self.row_ptr == other.row_ptr && self.col_idx == other.col_idx
    }

    /// `alpha * self + beta * other`; both operands must share the pattern.
    pub fn linear_combination(&self, alpha: T, other: &Self, beta: T) -> Self {
        assert!(self.same_pattern(other), "pattern mismatch");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| alpha * a + beta * b).collect();
        CsrMatrix { values, ..self.clone() }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).fold(T::zero(), |acc, (&j, &v)| acc + v * x[j])
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((j, i, v));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, &triplets)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> T {
        let scale = self.max_abs();
        if scale == T::zero() {
            return T::zero();
        }
        let mut worst = T::zero();
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Dense copy restricted to the given rows and columns.
    pub fn dense_block(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<T>> {
        let mut col_pos = vec![usize::MAX; self.ncols];
        for (k, &j) in cols.iter().enumerate() {
            col_pos[j] = k;
        }
        rows.iter()
            .map(|&i| {
                let mut dense = vec![T::zero(); cols.len()];
                let (cs, vs) = self.row(i);
                for (&j, &v) in cs.iter().zip(vs) {
                    if col_pos[j] != usize::MAX {
                        dense[col_pos[j]] = v;
                    }
                }
                dense
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let all_rows: Vec<usize> = (0..self.nrows).collect();
        let all_cols: Vec<usize> = (0..self.ncols).collect();
        self.dense_block(&all_rows, &all_cols)
    }

    /// Structural neighbours of every row in the symmetrized pattern, excluding the diagonal.
    pub fn symmetric_adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.nrows.max(self.ncols);
        let mut adj = vec![Vec::new(); n];
        for i in 0..self.nrows {
            let (cols, _) = self.row(i);
            for &j in cols {
                if i != j {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }
}
