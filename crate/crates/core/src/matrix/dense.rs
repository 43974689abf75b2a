//! Matrices as lists of rows.
//!
//! Shapes are checked at every binary operation and mismatches surface as a
//! [`DimensionError`], never as a partial result.

use super::{DimensionError, MatrixError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseMatrix<S> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> DenseMatrix<S> {
    /// Builds a matrix from row vectors, rejecting ragged input.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self, MatrixError> {
        if let Some(first) = rows.first() {
            let expected = first.len();
            if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != expected) {
                return Err(MatrixError::Ragged {
                    row,
                    len: r.len(),
                    expected,
                });
            }
        }
        Ok(DenseMatrix { rows })
    }

    pub fn empty() -> Self {
        DenseMatrix { rows: Vec::new() }
    }

    pub fn row_vector(values: Vec<S>) -> Self {
        DenseMatrix { rows: vec![values] }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> S) -> Self {
        DenseMatrix {
            rows: (0..rows).map(|i| (0..cols).map(|j| f(i, j)).collect()).collect(),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| S::zero())
    }

    /// (number of rows, length of the first row); `(0, 0)` when empty.
    pub fn dims(&self) -> (usize, usize) {
        (self.rows.len(), self.rows.first().map_or(0, Vec::len))
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<S>> {
        self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> Result<&S, MatrixError> {
        let (rows, cols) = self.dims();
        self.rows
            .get(i)
            .and_then(|r| r.get(j))
            .ok_or(MatrixError::Index { i, j, rows, cols })
    }

    pub fn map2(
        &self,
        other: &DenseMatrix<S>,
        f: impl Fn(&S, &S) -> S,
    ) -> Result<DenseMatrix<S>, MatrixError> {
        if self.rows.len() != other.rows.len() {
            return Err(DimensionError::invalid_length("map2").into());
        }
        let mut out = Vec::with_capacity(self.rows.len());
        for (a, b) in self.rows.iter().zip(&other.rows) {
            if a.len() != b.len() {
                return Err(DimensionError::invalid_length("map2").into());
            }
            out.push(a.iter().zip(b).map(|(x, y)| f(x, y)).collect());
        }
        Ok(DenseMatrix { rows: out })
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> DenseMatrix<S> {
        DenseMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(&f).collect())
                .collect(),
        }
    }

    /// Sum of elementwise products.
    pub fn dot_product(&self, other: &DenseMatrix<S>) -> Result<S, MatrixError> {
        let products = self.map2(other, |a, b| a.clone() * b.clone())?;
        Ok(products.fold(S::zero(), |acc, x| acc + x.clone()))
    }

    /// Row-major fold over every element.
    pub fn fold<A>(&self, init: A, mut f: impl FnMut(A, &S) -> A) -> A {
        let mut acc = init;
        for row in &self.rows {
            for x in row {
                acc = f(acc, x);
            }
        }
        acc
    }

    pub fn transpose(&self) -> DenseMatrix<S> {
        let (rows, cols) = self.dims();
        DenseMatrix::from_fn(cols, rows, |i, j| self.rows[j][i].clone())
    }

    pub fn nth_row(&self, j: usize) -> Result<DenseMatrix<S>, MatrixError> {
        let (rows, cols) = self.dims();
        self.rows
            .get(j)
            .map(|r| DenseMatrix::row_vector(r.clone()))
            .ok_or(MatrixError::Index { i: j, j: 0, rows, cols })
    }

    /// Prepends a column of ones.
    pub fn add_weight_coeff(&self) -> DenseMatrix<S> {
        DenseMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| std::iter::once(S::one()).chain(r.iter().cloned()).collect())
                .collect(),
        }
    }
}
