//! Dense row-major matrices over a generic scalar.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::Float;
use thiserror::Error;

use crate::scalar::{Exact, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
pub struct DimensionError {
    pub left_rows: usize,
    pub left_cols: usize,
    pub right_rows: usize,
    pub right_cols: usize,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = (0..self.rows)
            .map(|i| &self.data[i * self.cols..(i + 1) * self.cols])
            .collect();
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("data", &rows)
            .finish()
    }
}

impl<T> Matrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
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

    /// Builds a matrix from rows. Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, DimensionError> {
        if self.cols != rhs.rows {
            return Err(self.mismatch(rhs));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] = out[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, DimensionError> {
        if self.shape() != rhs.shape() {
            return Err(self.mismatch(rhs));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }

    /// Horizontal concatenation `[self | rhs]`.
    pub fn hcat(&self, rhs: &Self) -> Result<Self, DimensionError> {
        if self.rows != rhs.rows {
            return Err(self.mismatch(rhs));
        }
        Ok(Self::from_fn(self.rows, self.cols + rhs.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                rhs[(i, j - self.cols)].clone()
            }
        }))
    }

    /// Rows `idx` in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), self.cols, |i, j| self[(idx[i], j)].clone())
    }

    /// Columns `idx` in the given order.
    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])].clone())
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols);
        self.iter_rows()
            .map(|r| {
                r.iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    fn mismatch(&self, rhs: &Self) -> DimensionError {
        DimensionError {
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: rhs.rows,
            right_cols: rhs.cols,
        }
    }
}

impl<T: Exact> Matrix<T> {
    /// Exact rank by fraction-free (Bareiss) elimination.
    ///
    /// Every intermediate entry is a minor of the input, so for integer
    /// matrices the division by the previous pivot is exact.
    pub fn rank(&self) -> usize {
        let (rows, cols) = self.shape();
        let mut m = self.data.clone();
        let mut prev = T::one();
        let mut rank = 0;
        for col in 0..cols {
            if rank == rows {
                break;
            }
            let Some(p) = (rank..rows).find(|&r| !m[r * cols + col].is_zero()) else {
                continue;
            };
            if p != rank {
                for j in 0..cols {
                    m.swap(p * cols + j, rank * cols + j);
                }
            }
            let pivot = m[rank * cols + col].clone();
            for r in rank + 1..rows {
                let factor = m[r * cols + col].clone();
                for j in col + 1..cols {
                    let v = pivot.clone() * m[r * cols + j].clone()
                        - factor.clone() * m[rank * cols + j].clone();
                    m[r * cols + j] = v / prev.clone();
                }
                m[r * cols + col] = T::zero();
            }
            prev = pivot;
            rank += 1;
        }
        rank
    }
}

impl<T: Float + Scalar> Matrix<T> {
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    fn norm_one(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(T::zero(), |s, i| s + self[(i, j)].abs()))
            .fold(T::zero(), T::max)
    }

    /// Matrix exponential by scaling and squaring of a truncated Taylor series.
    pub fn expm(&self) -> Self {
        assert_eq!(self.rows, self.cols, "expm needs a square matrix");
        let n = self.rows;
        let norm = self.norm_one();
        let half = T::from(0.5).unwrap();
        let mut squarings = 0u32;
        let mut scaled = self.clone();
        let mut s = norm;
        while s > half {
            s = s * half;
            squarings += 1;
        }
        if squarings > 0 {
            let factor = T::from(2.0).unwrap().powi(-(squarings as i32));
            scaled = scaled.scale(&factor);
        }
        // ||scaled|| <= 1/2, so 20 terms reach below f64 epsilon.
        let mut sum = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..=20 {
            term = term.mul(&scaled).unwrap().scale(&(T::one() / T::from(k).unwrap()));
            sum = sum.add(&term).unwrap();
            if term.max_abs() <= T::epsilon() * sum.max_abs() {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum).unwrap();
        }
        sum
    }

    /// Numerical rank and solution of `self · x = rhs` by Gaussian elimination
    /// with partial pivoting. A pivot below `rel_tol · max|self|` counts as zero;
    /// the solution is `None` when the matrix is rank deficient.
    pub fn solve_with_rank(&self, rhs: &[T], rel_tol: T) -> (usize, Option<Vec<T>>) {
        assert_eq!(self.rows, self.cols);
        assert_eq!(rhs.len(), self.rows);
        let n = self.rows;
        let tol = rel_tol * self.max_abs();
        let mut a = self.clone();
        let mut b = rhs.to_vec();
        let mut rank = 0;
        let mut row = 0;
        let mut pivot_cols = Vec::new();
        for col in 0..n {
            let (p, best) = (row..n)
                .map(|r| (r, a[(r, col)].abs()))
                .fold((row, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if row >= n || best <= tol || best.is_zero() {
                continue;
            }
            if p != row {
                for j in 0..n {
                    let tmp = a[(p, j)];
                    a[(p, j)] = a[(row, j)];
                    a[(row, j)] = tmp;
                }
                b.swap(p, row);
            }
            for r in row + 1..n {
                let f = a[(r, col)] / a[(row, col)];
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[(row, j)];
                    a[(r, j)] = a[(r, j)] - f * v;
                }
                b[r] = b[r] - f * b[row];
            }
            pivot_cols.push(col);
            row += 1;
            rank += 1;
        }
        if rank < n {
            return (rank, None);
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let s = (i + 1..n).fold(b[i], |s, j| s - a[(i, j)] * x[j]);
            x[i] = s / a[(i, i)];
        }
        (rank, Some(x))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}
