//! Minimal dense matrix and rank-3 tensor storage.
//!
//! Game instances here are tiny (a handful of states, audits, and actions),
//! so flat row-major `Vec` storage beats pulling in a linear-algebra crate.

use crate::scalar::Real;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Real> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![R::zero(); rows * cols],
        }
    }

    /// Builds from nested rows; panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<R>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> R {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: R) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[R] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<R> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn row_sum(&self, r: usize) -> R {
        self.row(r).iter().copied().sum()
    }

    pub fn col_sum(&self, c: usize) -> R {
        (0..self.rows).map(|r| self.get(r, c)).sum()
    }

    pub fn sum(&self) -> R {
        self.data.iter().copied().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = R> + '_ {
        self.data.iter().copied()
    }

    /// Converts entries to `f64` nested rows, for serialization.
    pub fn to_nested_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|v| v.to_f64_lossy()).collect())
            .collect()
    }
}

/// Dense rank-3 tensor indexed by (state, audit, action).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<R> {
    dim0: usize,
    dim1: usize,
    dim2: usize,
    data: Vec<R>,
}

impl<R: Real> Tensor3<R> {
    pub fn zeros(dim0: usize, dim1: usize, dim2: usize) -> Self {
        Tensor3 {
            dim0,
            dim1,
            dim2,
            data: vec![R::zero(); dim0 * dim1 * dim2],
        }
    }

    pub fn from_fn(
        dim0: usize,
        dim1: usize,
        dim2: usize,
        mut f: impl FnMut(usize, usize, usize) -> R,
    ) -> Self {
        let mut data = Vec::with_capacity(dim0 * dim1 * dim2);
        for i in 0..dim0 {
            for j in 0..dim1 {
                for k in 0..dim2 {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3 {
            dim0,
            dim1,
            dim2,
            data,
        }
    }

    /// Builds from nested `[dim0][dim1][dim2]` vectors; panics on ragged input.
    pub fn from_nested(nested: Vec<Vec<Vec<R>>>) -> Self {
        let dim0 = nested.len();
        let dim1 = nested.first().map_or(0, Vec::len);
        let dim2 = nested
            .first()
            .and_then(|m| m.first())
            .map_or(0, Vec::len);
        assert!(
            nested
                .iter()
                .all(|m| m.len() == dim1 && m.iter().all(|r| r.len() == dim2)),
            "ragged tensor input"
        );
        Tensor3 {
            dim0,
            dim1,
            dim2,
            data: nested.into_iter().flatten().flatten().collect(),
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.dim0, self.dim1, self.dim2)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> R {
        debug_assert!(i < self.dim0 && j < self.dim1 && k < self.dim2);
        self.data[(i * self.dim1 + j) * self.dim2 + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: R) {
        debug_assert!(i < self.dim0 && j < self.dim1 && k < self.dim2);
        self.data[(i * self.dim1 + j) * self.dim2 + k] = v;
    }

    pub fn iter(&self) -> impl Iterator<Item = R> + '_ {
        self.data.iter().copied()
    }

    pub fn map(&self, f: impl Fn(R) -> R) -> Self {
        Tensor3 {
            dim0: self.dim0,
            dim1: self.dim1,
            dim2: self.dim2,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn to_nested_f64(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.dim0)
            .map(|i| {
                (0..self.dim1)
                    .map(|j| {
                        (0..self.dim2)
                            .map(|k| self.get(i, j, k).to_f64_lossy())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Solves `A z = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when the system is singular at the given tolerance.
pub fn solve_dense<R: Real>(a: &Matrix<R>, b: &[R], tol: R) -> Option<Vec<R>> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let mut aug: Vec<Vec<R>> = (0..n)
        .map(|r| {
            let mut row: Vec<R> = a.row(r).to_vec();
            row.push(b[r]);
            row
        })
        .collect();

    for col in 0..n {
        let pivot_row = (col..n).max_by(|&r1, &r2| {
            aug[r1][col]
                .abs()
                .partial_cmp(&aug[r2][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if aug[pivot_row][col].abs() <= tol {
            return None;
        }
        aug.swap(col, pivot_row);
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = aug[r][col] / aug[col][col];
            if factor != R::zero() {
                for c in col..=n {
                    let delta = factor * aug[col][c];
                    aug[r][c] = aug[r][c] - delta;
                }
            }
        }
    }
    Some((0..n).map(|r| aug[r][n] / aug[r][r]).collect())
}
