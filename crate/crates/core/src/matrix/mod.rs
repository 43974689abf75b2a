//! Three interchangeable matrix representations behind one interface.
//!
//! | backend  | storage                         | shape mismatch        |
//! |----------|---------------------------------|-----------------------|
//! | `dense`  | list of rows                    | [`DimensionError`]    |
//! | `lazy`   | element rule, deferred ops      | max shape, default 0  |
//! | `record` | dims + sparse map, eager ops    | max shape, default 0  |
//!
//! Binary operations on operands of different backends convert the right
//! operand to the backend of the left one.

mod dense;
mod lazy;
mod record;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use dense::DenseMatrix;
pub use lazy::LazyMatrix;
pub use record::RecordMatrix;

use crate::scalar::Scalar;

/// Shape mismatch reported by the dense backend.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct DimensionError {
    pub message: String,
}

impl DimensionError {
    pub fn invalid_length(op: &str) -> Self {
        DimensionError {
            message: format!("{op}: invalid length."),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error("index ({i}, {j}) out of bounds for {rows}x{cols} matrix")]
    Index {
        i: usize,
        j: usize,
        rows: usize,
        cols: usize,
    },
    #[error("ragged rows: row {row} has {len} columns, expected {expected}")]
    Ragged {
        row: usize,
        len: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Backend {
    Dense,
    Lazy,
    Record,
}

impl Backend {
    pub const ALL: [Backend; 3] = [Backend::Dense, Backend::Lazy, Backend::Record];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Dense => "dense",
            Backend::Lazy => "lazy",
            Backend::Record => "record",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dense" => Ok(Backend::Dense),
            "lazy" => Ok(Backend::Lazy),
            "record" => Ok(Backend::Record),
            other => Err(format!("unknown backend {other:?} (expected dense, lazy or record)")),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Matrix<S> {
    Dense(DenseMatrix<S>),
    Lazy(LazyMatrix<S>),
    Record(RecordMatrix<S>),
}

impl<S: Scalar> Matrix<S> {
    /// Builds a `rows x cols` matrix in `backend` from a full row listing.
    pub fn from_rows(backend: Backend, rows: Vec<Vec<S>>) -> Result<Self, MatrixError> {
        let dense = DenseMatrix::from_rows(rows)?;
        Ok(Matrix::Dense(dense).convert(backend))
    }

    /// Builds from sparse entries with default zero. Every key must lie in
    /// bounds; for the dense backend absent slots are filled with zeros.
    pub fn from_entries(
        backend: Backend,
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = ((usize, usize), S)>,
    ) -> Result<Self, MatrixError> {
        let record = RecordMatrix::from_entries(rows, cols, entries)?;
        Ok(Matrix::Record(record).convert(backend))
    }

    pub fn row_vector(backend: Backend, values: Vec<S>) -> Self {
        Matrix::Dense(DenseMatrix::row_vector(values)).convert(backend)
    }

    pub fn backend(&self) -> Backend {
        match self {
            Matrix::Dense(_) => Backend::Dense,
            Matrix::Lazy(_) => Backend::Lazy,
            Matrix::Record(_) => Backend::Record,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            Matrix::Dense(m) => m.dims(),
            Matrix::Lazy(m) => m.dims(),
            Matrix::Record(m) => m.dims(),
        }
    }

    /// Element `(i, j)`. Sparse backends are total and answer zero outside
    /// their bounds; the dense backend reports an index error.
    pub fn get(&self, i: usize, j: usize) -> Result<S, MatrixError> {
        match self {
            Matrix::Dense(m) => m.get(i, j).cloned(),
            Matrix::Lazy(m) => Ok(m.get(i, j)),
            Matrix::Record(m) => Ok(m.get(i, j)),
        }
    }

    pub fn map2(
        &self,
        other: &Matrix<S>,
        f: impl Fn(&S, &S) -> S + Send + Sync + 'static,
    ) -> Result<Matrix<S>, MatrixError> {
        let other = other.in_backend(self.backend());
        Ok(match (self, other.as_ref()) {
            (Matrix::Dense(a), Matrix::Dense(b)) => Matrix::Dense(a.map2(b, f)?),
            (Matrix::Lazy(a), Matrix::Lazy(b)) => Matrix::Lazy(a.map2(b, f)),
            (Matrix::Record(a), Matrix::Record(b)) => Matrix::Record(a.map2(b, f)),
            _ => unreachable!("operands share a backend"),
        })
    }

    pub fn map(&self, f: impl Fn(&S) -> S + Send + Sync + 'static) -> Matrix<S> {
        match self {
            Matrix::Dense(m) => Matrix::Dense(m.map(f)),
            Matrix::Lazy(m) => Matrix::Lazy(m.map(f)),
            Matrix::Record(m) => Matrix::Record(m.map(f)),
        }
    }

    /// Sum of elementwise products (Frobenius inner product).
    pub fn dot_product(&self, other: &Matrix<S>) -> Result<S, MatrixError> {
        let other = other.in_backend(self.backend());
        match (self, other.as_ref()) {
            (Matrix::Dense(a), Matrix::Dense(b)) => a.dot_product(b),
            (Matrix::Lazy(a), Matrix::Lazy(b)) => Ok(a.dot_product(b)),
            (Matrix::Record(a), Matrix::Record(b)) => Ok(a.dot_product(b)),
            _ => unreachable!("operands share a backend"),
        }
    }

    /// Row-major fold over every in-bounds element, starting from `init`.
    pub fn fold<A>(&self, init: A, f: impl FnMut(A, &S) -> A) -> A {
        match self {
            Matrix::Dense(m) => m.fold(init, f),
            Matrix::Lazy(m) => m.fold(init, f),
            Matrix::Record(m) => m.fold(init, f),
        }
    }

    pub fn transpose(&self) -> Matrix<S> {
        match self {
            Matrix::Dense(m) => Matrix::Dense(m.transpose()),
            Matrix::Lazy(m) => Matrix::Lazy(m.transpose()),
            Matrix::Record(m) => Matrix::Record(m.transpose()),
        }
    }

    /// Row `j` as a `1 x cols` matrix.
    pub fn nth_row(&self, j: usize) -> Result<Matrix<S>, MatrixError> {
        Ok(match self {
            Matrix::Dense(m) => Matrix::Dense(m.nth_row(j)?),
            Matrix::Lazy(m) => Matrix::Lazy(m.nth_row(j)),
            Matrix::Record(m) => Matrix::Record(m.nth_row(j)),
        })
    }

    /// Prepends a column of ones, turning an input row into the bias-augmented
    /// row a weight row is dotted with.
    pub fn add_weight_coeff(&self) -> Matrix<S> {
        match self {
            Matrix::Dense(m) => Matrix::Dense(m.add_weight_coeff()),
            Matrix::Lazy(m) => Matrix::Lazy(m.add_weight_coeff()),
            Matrix::Record(m) => Matrix::Record(m.add_weight_coeff()),
        }
    }

    /// Elementwise-equal matrix in `target`. Converting to a sparse backend
    /// drops zeros into the default.
    pub fn convert(&self, target: Backend) -> Matrix<S> {
        match (self, target) {
            (Matrix::Dense(_), Backend::Dense)
            | (Matrix::Lazy(_), Backend::Lazy)
            | (Matrix::Record(_), Backend::Record) => self.clone(),
            (_, Backend::Dense) => {
                let (rows, cols) = self.dims();
                let src = self.to_record();
                Matrix::Dense(DenseMatrix::from_fn(rows, cols, |i, j| src.get(i, j)))
            }
            (_, Backend::Record) => Matrix::Record(self.to_record()),
            (_, Backend::Lazy) => {
                let record = self.to_record();
                let (rows, cols) = record.dims();
                Matrix::Lazy(LazyMatrix::from_map(rows, cols, record.entries().clone()))
            }
        }
    }

    /// Materialises into the record backend.
    pub fn to_record(&self) -> RecordMatrix<S> {
        match self {
            Matrix::Record(m) => m.clone(),
            Matrix::Lazy(m) => m.materialise(),
            Matrix::Dense(m) => {
                let (rows, cols) = m.dims();
                let mut entries = BTreeMap::new();
                for (i, row) in m.rows().iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        if !v.is_zero() {
                            entries.insert((i, j), v.clone());
                        }
                    }
                }
                RecordMatrix::from_canonical(rows, cols, entries)
            }
        }
    }

    /// Full row listing of the in-bounds elements.
    pub fn to_rows(&self) -> Vec<Vec<S>> {
        match self {
            Matrix::Dense(m) => m.rows().to_vec(),
            _ => {
                let (rows, cols) = self.dims();
                let src = self.to_record();
                (0..rows)
                    .map(|i| (0..cols).map(|j| src.get(i, j)).collect())
                    .collect()
            }
        }
    }

    /// `(column, value)` pairs of row `j` that the backend has to visit when
    /// computing with that row: every column for dense, the structural
    /// support for sparse backends.
    pub fn row_terms(&self, j: usize) -> Vec<(usize, S)> {
        match self {
            Matrix::Dense(m) => m
                .rows()
                .get(j)
                .map(|r| r.iter().cloned().enumerate().collect())
                .unwrap_or_default(),
            Matrix::Lazy(m) => {
                let row = m.nth_row(j);
                match row.support() {
                    Some(s) => s.iter().map(|&(_, c)| (c, row.get(0, c))).collect(),
                    None => (0..m.dims().1).map(|c| (c, row.get(0, c))).collect(),
                }
            }
            Matrix::Record(m) => m
                .nth_row(j)
                .entries()
                .iter()
                .map(|(&(_, c), v)| (c, v.clone()))
                .collect(),
        }
    }

    /// Exact elementwise equality of the in-bounds elements and dims,
    /// regardless of backend.
    pub fn same_elements(&self, other: &Matrix<S>) -> bool {
        self.dims() == other.dims() && self.to_record().entries() == other.to_record().entries()
    }

    /// Converts every element to another scalar kind.
    pub fn cast<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        let record = self.to_record();
        let (rows, cols) = record.dims();
        let entries = record.entries().iter().map(|(&k, v)| (k, f(v)));
        Matrix::from_entries(self.backend(), rows, cols, entries)
            .expect("keys come from an in-bounds record")
    }

    fn in_backend(&self, backend: Backend) -> std::borrow::Cow<'_, Matrix<S>> {
        if self.backend() == backend {
            std::borrow::Cow::Borrowed(self)
        } else {
            std::borrow::Cow::Owned(self.convert(backend))
        }
    }
}

impl<S: Scalar> From<DenseMatrix<S>> for Matrix<S> {
    fn from(m: DenseMatrix<S>) -> Self {
        Matrix::Dense(m)
    }
}

impl<S: Scalar> From<LazyMatrix<S>> for Matrix<S> {
    fn from(m: LazyMatrix<S>) -> Self {
        Matrix::Lazy(m)
    }
}

impl<S: Scalar> From<RecordMatrix<S>> for Matrix<S> {
    fn from(m: RecordMatrix<S>) -> Self {
        Matrix::Record(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn layer5(backend: Backend) -> Matrix<Rational> {
        Matrix::from_entries(
            backend,
            50,
            51,
            [((0, 0), r(1, 1)), ((0, 10), r(-1, 1)), ((0, 29), r(-1, 1))],
        )
        .unwrap()
    }

    #[test]
    fn layer5_fragment_queries() {
        for b in Backend::ALL {
            let m = layer5(b);
            assert_eq!(m.dims(), (50, 51));
            assert_eq!(m.get(0, 10).unwrap(), r(-1, 1));
            assert_eq!(m.nth_row(0).unwrap().get(0, 10).unwrap(), r(-1, 1));
            let sum = m.fold(Rational::from(0), |a, x| a + x.clone());
            assert_eq!(sum, r(-1, 1));
        }
    }

    #[test]
    fn sparse_get_is_total() {
        let m = Matrix::<Rational>::from_entries(Backend::Record, 2, 2, []).unwrap();
        assert_eq!(m.get(5, 5).unwrap(), r(0, 1));
        let m = m.convert(Backend::Lazy);
        assert_eq!(m.get(5, 5).unwrap(), r(0, 1));
    }

    #[test]
    fn dense_to_record_drops_zeros() {
        let m = Matrix::from_rows(Backend::Dense, vec![vec![r(0, 1), r(1, 1)]]).unwrap();
        let rec = m.to_record();
        assert_eq!(rec.entries().len(), 1);
        assert_eq!(rec.entries()[&(0, 1)], r(1, 1));
    }

    #[test]
    fn record_to_dense_has_every_slot() {
        let dense = layer5(Backend::Record).convert(Backend::Dense);
        let slots = dense.fold(0usize, |n, _| n + 1);
        assert_eq!(slots, 50 * 51);
    }

    #[test]
    fn map_preserves_sparsity_pattern() {
        for b in [Backend::Lazy, Backend::Record] {
            let m = layer5(b);
            let doubled = m.map(|x| x.clone() * Rational::from(2));
            let before: Vec<_> = m.to_record().entries().keys().copied().collect();
            let after: Vec<_> = doubled.to_record().entries().keys().copied().collect();
            assert_eq!(before, after);
        }
    }

    #[test]
    fn disjoint_sparse_rows_dot_to_zero() {
        let a = Matrix::from_entries(Backend::Lazy, 1, 6, [((0, 1), r(3, 1)), ((0, 4), r(2, 7))])
            .unwrap();
        let b = Matrix::from_entries(Backend::Lazy, 1, 6, [((0, 0), r(5, 1)), ((0, 5), r(-1, 2))])
            .unwrap();
        // brute-force dense equivalent
        let dense = a
            .convert(Backend::Dense)
            .dot_product(&b.convert(Backend::Dense))
            .unwrap();
        assert_eq!(dense, r(0, 1));
        for backend in Backend::ALL {
            let got = a.convert(backend).dot_product(&b.convert(backend)).unwrap();
            assert_eq!(got, dense);
        }
    }

    #[test]
    fn lazy_dot_visits_only_support() {
        let w = layer5(Backend::Lazy).nth_row(0).unwrap();
        let x = Matrix::row_vector(Backend::Lazy, (0..51).map(|i| Rational::from(i + 1)).collect());
        let (value, ops) = crate::scalar::count_ops(|| w.dot_product(&x).unwrap());
        assert_eq!(value, r(1 - 11 - 30, 1));
        assert_eq!(ops.muls, 3);
    }

    fn arb_matrix(max: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
        (1..=max, 1..=max).prop_flat_map(|(rows, cols)| {
            proptest::collection::vec(
                proptest::collection::vec((-5i64..=5, 1i64..=4).prop_map(|(n, d)| r(n, d)), cols),
                rows,
            )
        })
    }

    proptest! {
        #[test]
        fn transpose_is_an_involution(rows in arb_matrix(6)) {
            for b in Backend::ALL {
                let m = Matrix::from_rows(b, rows.clone()).unwrap();
                prop_assert!(m.transpose().transpose().same_elements(&m));
                let (r_, c_) = m.dims();
                prop_assert_eq!(m.transpose().dims(), (c_, r_));
            }
        }

        #[test]
        fn conversion_round_trips(rows in arb_matrix(6)) {
            let dense = Matrix::from_rows(Backend::Dense, rows.clone()).unwrap();
            for b in Backend::ALL {
                let back = dense.convert(b).convert(Backend::Dense);
                prop_assert_eq!(back.to_rows(), rows.clone());
            }
        }

        #[test]
        fn map2_with_zero_is_identity(rows in arb_matrix(6)) {
            for b in Backend::ALL {
                let m = Matrix::from_rows(b, rows.clone()).unwrap();
                let (nr, nc) = m.dims();
                let z = Matrix::from_entries(b, nr, nc, []).unwrap();
                let sum = m.map2(&z, |x, y| x.clone() + y.clone()).unwrap();
                prop_assert!(sum.same_elements(&m));
                prop_assert_eq!(m.dot_product(&z).unwrap(), Rational::from(0));
            }
        }
    }
}
