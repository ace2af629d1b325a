//! Small dense matrices and Gaussian elimination with partial pivoting.

use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("matrix is singular (no pivot in column {column})")]
pub struct SingularMatrix {
    pub column: usize,
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_vec(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, x)| acc + a.clone() * x.clone())
            })
            .collect()
    }

    /// `I - factor * self` for a square matrix.
    pub fn identity_minus_scaled(&self, factor: &T) -> Self {
        assert_eq!(self.rows, self.cols, "matrix must be square");
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let diag = if i == j { T::one() } else { T::zero() };
                out[(i, j)] = diag - factor.clone() * self[(i, j)].clone();
            }
        }
        out
    }

    /// Solves `self * x = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>, SingularMatrix> {
        assert_eq!(self.rows, self.cols, "matrix must be square");
        assert_eq!(rhs.len(), self.rows, "dimension mismatch");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();

        for col in 0..n {
            let pivot = (col..n)
                .filter(|&r| !a[r * n + col].is_zero())
                .max_by(|&r, &s| {
                    a[r * n + col]
                        .abs()
                        .partial_cmp(&a[s * n + col].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .ok_or(SingularMatrix { column: col })?;
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                b.swap(pivot, col);
            }
            let p = a[col * n + col].clone();
            for r in col + 1..n {
                let entry = a[r * n + col].clone();
                if entry.is_zero() {
                    continue;
                }
                let factor = entry / p.clone();
                for j in col..n {
                    let delta = factor.clone() * a[col * n + j].clone();
                    a[r * n + j] = a[r * n + j].clone() - delta;
                }
                b[r] = b[r].clone() - factor * b[col].clone();
            }
        }

        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut acc = b[i].clone();
            for j in i + 1..n {
                acc = acc - a[i * n + j].clone() * x[j].clone();
            }
            x[i] = acc / a[i * n + i].clone();
        }
        Ok(x)
    }

    /// Solves `x * self = rhs` for a row vector `x`.
    pub fn solve_left(&self, rhs: &[T]) -> Result<Vec<T>, SingularMatrix> {
        self.transpose().solve(rhs)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}
