//! Matrices as records of dimensions plus a sparse map with default zero.
//!
//! Operations here are eager: `map2` walks every index of the result shape
//! and stores the nonzero results. The default value is never stored.

use std::collections::BTreeMap;

use super::MatrixError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordMatrix<S> {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), S>,
}

impl<S: Scalar> RecordMatrix<S> {
    pub fn new(rows: usize, cols: usize) -> Self {
        RecordMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    /// Builds from `(i, j, value)` triples. Zero values are dropped; a key
    /// outside the declared bounds is an error. Later duplicates overwrite
    /// earlier ones.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = ((usize, usize), S)>,
    ) -> Result<Self, MatrixError> {
        let mut map = BTreeMap::new();
        for ((i, j), v) in entries {
            if i >= rows || j >= cols {
                return Err(MatrixError::Index { i, j, rows, cols });
            }
            if v.is_zero() {
                map.remove(&(i, j));
            } else {
                map.insert((i, j), v);
            }
        }
        Ok(RecordMatrix {
            rows,
            cols,
            entries: map,
        })
    }

    /// Caller guarantees keys are in bounds and values nonzero.
    pub(crate) fn from_canonical(
        rows: usize,
        cols: usize,
        entries: BTreeMap<(usize, usize), S>,
    ) -> Self {
        debug_assert!(entries
            .iter()
            .all(|(&(i, j), v)| i < rows && j < cols && !v.is_zero()));
        RecordMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), S> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(S::zero)
    }

    fn insert_nonzero(map: &mut BTreeMap<(usize, usize), S>, key: (usize, usize), v: S) {
        if !v.is_zero() {
            map.insert(key, v);
        }
    }

    /// Eager elementwise combination over the componentwise-max shape;
    /// absent entries read as zero.
    pub fn map2(&self, other: &RecordMatrix<S>, f: impl Fn(&S, &S) -> S) -> RecordMatrix<S> {
        let rows = self.rows.max(other.rows);
        let cols = self.cols.max(other.cols);
        let mut out = BTreeMap::new();
        if f(&S::zero(), &S::zero()).is_zero() {
            // only positions stored on either side can be nonzero
            for &k in self.entries.keys().chain(other.entries.keys()) {
                if !out.contains_key(&k) {
                    Self::insert_nonzero(&mut out, k, f(&self.get(k.0, k.1), &other.get(k.0, k.1)));
                }
            }
        } else {
            for i in 0..rows {
                for j in 0..cols {
                    let v = f(&self.get(i, j), &other.get(i, j));
                    Self::insert_nonzero(&mut out, (i, j), v);
                }
            }
        }
        RecordMatrix::from_canonical(rows, cols, out)
    }

    /// Maps stored entries only when `f(0) = 0`; otherwise every in-bounds
    /// index is materialised.
    pub fn map(&self, f: impl Fn(&S) -> S) -> RecordMatrix<S> {
        let mut out = BTreeMap::new();
        if f(&S::zero()).is_zero() {
            for (&k, v) in &self.entries {
                Self::insert_nonzero(&mut out, k, f(v));
            }
        } else {
            for i in 0..self.rows {
                for j in 0..self.cols {
                    Self::insert_nonzero(&mut out, (i, j), f(&self.get(i, j)));
                }
            }
        }
        RecordMatrix::from_canonical(self.rows, self.cols, out)
    }

    /// Sum of products over positions stored in both operands.
    pub fn dot_product(&self, other: &RecordMatrix<S>) -> S {
        self.entries
            .iter()
            .filter_map(|(k, a)| other.entries.get(k).map(|b| a.clone() * b.clone()))
            .fold(S::zero(), |acc, v| acc + v)
    }

    /// Row-major fold over every in-bounds element.
    pub fn fold<A>(&self, init: A, mut f: impl FnMut(A, &S) -> A) -> A {
        let mut acc = init;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc = f(acc, &self.get(i, j));
            }
        }
        acc
    }

    pub fn transpose(&self) -> RecordMatrix<S> {
        let entries = self
            .entries
            .iter()
            .map(|(&(i, j), v)| ((j, i), v.clone()))
            .collect();
        RecordMatrix::from_canonical(self.cols, self.rows, entries)
    }

    /// Row `j` as a `1 x cols` record; rows past the end read as zeros.
    pub fn nth_row(&self, j: usize) -> RecordMatrix<S> {
        let entries = self
            .entries
            .range((j, 0)..(j + 1, 0))
            .map(|(&(_, c), v)| ((0, c), v.clone()))
            .collect();
        RecordMatrix::from_canonical(1, self.cols, entries)
    }

    /// Prepends a column of ones.
    pub fn add_weight_coeff(&self) -> RecordMatrix<S> {
        let mut entries: BTreeMap<_, _> = (0..self.rows).map(|i| ((i, 0), S::one())).collect();
        entries.extend(self.entries.iter().map(|(&(i, j), v)| ((i, j + 1), v.clone())));
        RecordMatrix::from_canonical(self.rows, self.cols + 1, entries)
    }
}
