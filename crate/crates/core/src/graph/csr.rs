//! Compressed sparse row adjacency matrices.

use crate::{Error, Matrix, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// How [`SparseAdjacency::normalize_sym_with`] treats asymmetric input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetrize {
    /// Symmetrize only when the matrix is not already symmetric.
    #[default]
    Auto,
    /// Always normalize `Â + Âᵀ`.
    Force,
    /// Normalize the matrix as given, even if directed.
    Never,
}

impl std::str::FromStr for Symmetrize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Symmetrize::Auto),
            "force" => Ok(Symmetrize::Force),
            "never" => Ok(Symmetrize::Never),
            other => Err(Error::Config(format!("unknown symmetrize mode {other:?}"))),
        }
    }
}

/// Immutable CSR matrix. Column indices are strictly increasing within a row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseAdjacency {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    symmetric_hint: bool,
}

impl SparseAdjacency {
    /// Binary adjacency from an edge list. Duplicate edges collapse to a single
    /// unit entry; undirected input stores both orientations.
    pub fn from_edges(edges: &[(usize, usize)], n: usize, directed: bool) -> Result<Self> {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(s, d) in edges {
            for idx in [s, d] {
                if idx >= n {
                    return Err(Error::OutOfRange { index: idx, bound: n });
                }
            }
            rows[s].push(d);
            if !directed {
                rows[d].push(s);
            }
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        row_offsets.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col_indices.extend(r);
            row_offsets.push(col_indices.len());
        }
        let values = vec![1.0; col_indices.len()];
        Ok(SparseAdjacency {
            n_rows: n,
            n_cols: n,
            row_offsets,
            col_indices,
            values,
            symmetric_hint: !directed,
        })
    }

    /// Sets the symmetry hint from an exact comparison with the transpose.
    pub fn detect_symmetry(mut self) -> Self {
        self.symmetric_hint = self.check_symmetric(0.0).is_ok();
        self
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n_rows];
        for (i, j, v) in triplets {
            if i >= n_rows {
                return Err(Error::OutOfRange { index: i, bound: n_rows });
            }
            if j >= n_cols {
                return Err(Error::OutOfRange { index: j, bound: n_cols });
            }
            if !v.is_finite() {
                return Err(Error::Numeric(format!("non-finite entry at ({i}, {j})")));
            }
            *rows[i].entry(j).or_insert(0.0) += v;
        }
        let mut row_offsets = Vec::with_capacity(n_rows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for r in rows {
            for (j, v) in r {
                col_indices.push(j);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        let mut m = SparseAdjacency {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
            symmetric_hint: false,
        };
        m.symmetric_hint = m.check_symmetric(0.0).is_ok();
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        SparseAdjacency {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
            symmetric_hint: true,
        }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseAdjacency {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
            symmetric_hint: n_rows == n_cols,
        }
    }

    /// Sparse copy of a dense matrix, keeping exact nonzeros.
    pub fn from_dense(m: &Matrix) -> Self {
        let triplets = (0..m.rows()).flat_map(|i| {
            (0..m.cols()).filter_map(move |j| {
                let v = m.get(i, j);
                (v != 0.0).then_some((i, j, v))
            })
        });
        Self::from_triplets(m.rows(), m.cols(), triplets).expect("dense entries are in range")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn symmetric_hint(&self) -> bool {
        self.symmetric_hint
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[span.clone()].binary_search(&j) {
            Ok(p) => self.values[span.start + p],
            Err(_) => 0.0,
        }
    }

    /// Nonzero `(row, col)` coordinates in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    pub fn transpose(&self) -> SparseAdjacency {
        let triplets = self.entries().map(|(i, j, v)| (j, i, v));
        let mut t = Self::from_triplets(self.n_cols, self.n_rows, triplets)
            .expect("transpose indices are in range");
        t.symmetric_hint = self.symmetric_hint;
        t
    }

    /// Fails with the first entry whose transpose differs by more than `tol`.
    pub fn check_symmetric(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "{}x{} matrix cannot be symmetric",
                self.n_rows, self.n_cols
            )));
        }
        for (i, j, v) in self.entries() {
            let diff = (v - self.get(j, i)).abs();
            if diff > tol {
                return Err(Error::Asymmetric { row: i, col: j, diff });
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.entries() {
            m.set(i, j, v);
        }
        m
    }

    /// `Â = A + I`: every diagonal entry incremented by one.
    pub fn add_self_loops(&self) -> Result<SparseAdjacency> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "self loops need a square matrix, got {}x{}",
                self.n_rows, self.n_cols
            )));
        }
        let n = self.n_rows;
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(self.nnz() + n);
        let mut values = Vec::with_capacity(self.nnz() + n);
        row_offsets.push(0);
        for i in 0..n {
            let mut placed = false;
            for (j, v) in self.row(i) {
                if !placed && j >= i {
                    if j == i {
                        col_indices.push(j);
                        values.push(v + 1.0);
                        placed = true;
                        continue;
                    }
                    col_indices.push(i);
                    values.push(1.0);
                    placed = true;
                }
                col_indices.push(j);
                values.push(v);
            }
            if !placed {
                col_indices.push(i);
                values.push(1.0);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseAdjacency {
            n_rows: n,
            n_cols: n,
            row_offsets,
            col_indices,
            values,
            symmetric_hint: self.symmetric_hint,
        })
    }

    /// `D̂^{-1/2} Â D̂^{-1/2}` with automatic symmetrization of directed input.
    pub fn normalize_sym(&self) -> Result<SparseAdjacency> {
        self.normalize_sym_with(Symmetrize::Auto)
    }

    /// Symmetric degree normalization. When symmetrization applies, the
    /// normalized matrix is that of `Â + Âᵀ`; the raw matrix is untouched.
    pub fn normalize_sym_with(&self, mode: Symmetrize) -> Result<SparseAdjacency> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "normalization needs a square matrix, got {}x{}",
                self.n_rows, self.n_cols
            )));
        }
        let is_symmetric = self.symmetric_hint || self.check_symmetric(0.0).is_ok();
        let symmetrize = match mode {
            Symmetrize::Never => false,
            Symmetrize::Force => true,
            Symmetrize::Auto => !is_symmetric,
        };
        let base = if symmetrize {
            let t = self.transpose();
            let mut s =
                Self::from_triplets(self.n_rows, self.n_cols, self.entries().chain(t.entries()))?;
            s.symmetric_hint = true;
            s
        } else {
            let mut s = self.clone();
            s.symmetric_hint = is_symmetric;
            s
        };
        let degrees = base.row_sums();
        if let Some(i) = degrees.iter().position(|&d| d <= 0.0) {
            return Err(Error::DegenerateDegree(i));
        }
        let mut out = base.clone();
        for i in 0..out.n_rows {
            for p in out.row_offsets[i]..out.row_offsets[i + 1] {
                let j = out.col_indices[p];
                out.values[p] /= (degrees[i] * degrees[j]).sqrt();
            }
        }
        out.symmetric_hint = base.symmetric_hint;
        Ok(out)
    }

    /// Sparse-dense product `S · X`, summed in CSR order per row.
    pub fn spmm(&self, x: &Matrix) -> Result<Matrix> {
        if self.n_cols != x.rows() {
            return Err(Error::Shape(format!(
                "spmm {}x{} by {}x{}",
                self.n_rows,
                self.n_cols,
                x.rows(),
                x.cols()
            )));
        }
        let m = x.cols();
        let mut out = Matrix::zeros(self.n_rows, m);
        for i in 0..self.n_rows {
            let o = out.row_mut(i);
            for (j, v) in self.row(i) {
                for (acc, &b) in o.iter_mut().zip(x.row(j)) {
                    *acc += v * b;
                }
            }
        }
        Ok(out)
    }

    /// `Sᵀ · G` without materializing the transpose.
    pub fn spmm_transpose(&self, g: &Matrix) -> Result<Matrix> {
        if self.n_rows != g.rows() {
            return Err(Error::Shape(format!(
                "spmmᵀ ({}x{})ᵀ by {}x{}",
                self.n_rows,
                self.n_cols,
                g.rows(),
                g.cols()
            )));
        }
        let m = g.cols();
        let mut out = Matrix::zeros(self.n_cols, m);
        for i in 0..self.n_rows {
            let g_row = g.row(i);
            for (j, v) in self.row(i) {
                for (acc, &b) in out.row_mut(j).iter_mut().zip(g_row) {
                    *acc += v * b;
                }
            }
        }
        Ok(out)
    }

    /// Row-permuted and column-permuted copy `P S Pᵀ`, where node `i` moves to `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<SparseAdjacency> {
        if perm.len() != self.n_rows || !self.is_square() {
            return Err(Error::Shape("permutation length must match a square matrix".into()));
        }
        let mut s = Self::from_triplets(
            self.n_rows,
            self.n_cols,
            self.entries().map(|(i, j, v)| (perm[i], perm[j], v)),
        )?;
        s.symmetric_hint = self.symmetric_hint;
        Ok(s)
    }
}
