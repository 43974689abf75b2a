//! Matrices as functions from indices to values.
//!
//! A [`LazyMatrix`] answers element queries through a deferred rule.
//! Elementwise operations compose rules and do no scalar work until an
//! element is requested. Every index pair outside the declared bounds answers
//! zero, so operands of different shapes combine without error tracking.
//!
//! Views built from a sparse map remember which index pairs may be nonzero.
//! `dot_product` uses that support to skip terms that are structurally zero,
//! which is where this backend wins on pruned networks.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::record::RecordMatrix;
use crate::scalar::Scalar;

type Query<S> = Arc<dyn Fn(usize, usize) -> S + Send + Sync>;

#[derive(Clone)]
pub struct LazyMatrix<S> {
    rows: usize,
    cols: usize,
    query: Query<S>,
    /// Sorted row-major list of the only in-bounds pairs that can be nonzero.
    support: Option<Arc<[(usize, usize)]>>,
}

impl<S: Scalar> LazyMatrix<S> {
    /// View over an arbitrary element rule. The rule is only consulted for
    /// in-bounds pairs.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        query: impl Fn(usize, usize) -> S + Send + Sync + 'static,
    ) -> Self {
        LazyMatrix {
            rows,
            cols,
            query: Arc::new(query),
            support: None,
        }
    }

    /// View backed by a map with default zero. Out-of-bounds keys and zero
    /// values are dropped.
    pub fn from_map(rows: usize, cols: usize, map: BTreeMap<(usize, usize), S>) -> Self {
        let map: BTreeMap<(usize, usize), S> = map
            .into_iter()
            .filter(|((i, j), v)| *i < rows && *j < cols && !v.is_zero())
            .collect();
        let support: Arc<[(usize, usize)]> = map.keys().copied().collect();
        let map = Arc::new(map);
        LazyMatrix {
            rows,
            cols,
            query: Arc::new(move |i, j| map.get(&(i, j)).cloned().unwrap_or_else(S::zero)),
            support: Some(support),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        if i < self.rows && j < self.cols {
            (self.query)(i, j)
        } else {
            S::zero()
        }
    }

    /// Known structural support, if any.
    pub fn support(&self) -> Option<&[(usize, usize)]> {
        self.support.as_deref()
    }

    /// Deferred elementwise combination over the componentwise-max shape.
    pub fn map2(
        &self,
        other: &LazyMatrix<S>,
        f: impl Fn(&S, &S) -> S + Send + Sync + 'static,
    ) -> LazyMatrix<S> {
        let a = self.clone();
        let b = other.clone();
        LazyMatrix::from_fn(
            self.rows.max(other.rows),
            self.cols.max(other.cols),
            move |i, j| f(&a.get(i, j), &b.get(i, j)),
        )
    }

    pub fn map(&self, f: impl Fn(&S) -> S + Send + Sync + 'static) -> LazyMatrix<S> {
        let a = self.clone();
        LazyMatrix::from_fn(self.rows, self.cols, move |i, j| f(&a.get(i, j)))
    }

    pub fn dot_product(&self, other: &LazyMatrix<S>) -> S {
        let rows = self.rows.max(other.rows);
        let cols = self.cols.max(other.cols);
        let term = |(i, j): (usize, usize)| self.get(i, j) * other.get(i, j);
        match (self.support(), other.support()) {
            (Some(a), Some(b)) => {
                let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
                small
                    .iter()
                    .filter(|k| large.binary_search(k).is_ok())
                    .fold(S::zero(), |acc, &k| acc + term(k))
            }
            (Some(s), None) | (None, Some(s)) => {
                s.iter().fold(S::zero(), |acc, &k| acc + term(k))
            }
            (None, None) => (0..rows)
                .flat_map(|i| (0..cols).map(move |j| (i, j)))
                .fold(S::zero(), |acc, k| acc + term(k)),
        }
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

    pub fn transpose(&self) -> LazyMatrix<S> {
        let a = self.clone();
        let support = self.support.as_ref().map(|s| {
            let mut t: Vec<_> = s.iter().map(|&(i, j)| (j, i)).collect();
            t.sort_unstable();
            Arc::from(t)
        });
        LazyMatrix {
            rows: self.cols,
            cols: self.rows,
            query: Arc::new(move |i, j| a.get(j, i)),
            support,
        }
    }

    /// Row `j` as a `1 x cols` view; rows past the end read as zeros.
    pub fn nth_row(&self, j: usize) -> LazyMatrix<S> {
        let a = self.clone();
        let support = self.support.as_ref().map(|s| {
            s.iter()
                .filter(|&&(i, _)| i == j)
                .map(|&(_, c)| (0, c))
                .collect::<Arc<[_]>>()
        });
        LazyMatrix {
            rows: 1,
            cols: self.cols,
            query: Arc::new(move |_, c| a.get(j, c)),
            support,
        }
    }

    /// Prepends a column of ones.
    pub fn add_weight_coeff(&self) -> LazyMatrix<S> {
        let a = self.clone();
        let support = self.support.as_ref().map(|s| {
            let mut t: Vec<_> = (0..self.rows).map(|i| (i, 0)).collect();
            t.extend(s.iter().map(|&(i, j)| (i, j + 1)));
            t.sort_unstable();
            Arc::from(t)
        });
        LazyMatrix {
            rows: self.rows,
            cols: self.cols + 1,
            query: Arc::new(move |i, j| if j == 0 { S::one() } else { a.get(i, j - 1) }),
            support,
        }
    }

    /// Evaluates every in-bounds element into an eager sparse record.
    pub fn materialise(&self) -> RecordMatrix<S> {
        let mut entries = BTreeMap::new();
        match self.support() {
            Some(s) => {
                for &(i, j) in s {
                    let v = self.get(i, j);
                    if !v.is_zero() {
                        entries.insert((i, j), v);
                    }
                }
            }
            None => {
                for i in 0..self.rows {
                    for j in 0..self.cols {
                        let v = self.get(i, j);
                        if !v.is_zero() {
                            entries.insert((i, j), v);
                        }
                    }
                }
            }
        }
        RecordMatrix::from_canonical(self.rows, self.cols, entries)
    }
}

impl<S> fmt::Debug for LazyMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazyMatrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("support", &self.support.as_ref().map(|s| s.len()))
            .finish()
    }
}
