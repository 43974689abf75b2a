//! Fully-connected ReLU networks.
//!
//! A layer's weight matrix has one row per node. Column 0 of each row holds
//! the node's bias and columns `1..` its input weights; inputs are augmented
//! with a leading 1 before the dot product, so a single matrix carries both.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::matrix::{Backend, DimensionError, Matrix, MatrixError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("layer {layer} expects {expected} inputs but the previous layer produces {got}")]
    Shape {
        layer: usize,
        expected: usize,
        got: usize,
    },
    #[error("layer {layer} has no bias column")]
    NoBiasColumn { layer: usize },
    #[error("network input arity must be positive")]
    ZeroArity,
    #[error("empty output")]
    EmptyOutput,
    #[error("{labels} labels for {outputs} outputs")]
    LabelCount { labels: usize, outputs: usize },
}

pub fn relu<S: Scalar>(x: &S) -> S {
    if *x > S::zero() {
        x.clone()
    } else {
        S::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub fn apply<S: Scalar>(self, x: &S) -> S {
        match self {
            Activation::Relu => relu(x),
            Activation::Identity => x.clone(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relu" => Ok(Activation::Relu),
            "identity" | "linear" => Ok(Activation::Identity),
            other => Err(format!("unknown activation {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Layer<S> {
    weights: Matrix<S>,
    activation: Activation,
}

impl<S: Scalar> Layer<S> {
    /// `weights` is `n_nodes x (n_inputs + 1)` with biases in column 0.
    pub fn new(weights: Matrix<S>, activation: Activation) -> Result<Self, NetworkError> {
        if weights.dims().1 == 0 {
            return Err(NetworkError::NoBiasColumn { layer: 0 });
        }
        Ok(Layer {
            weights,
            activation,
        })
    }

    pub fn weights(&self) -> &Matrix<S> {
        &self.weights
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn n_nodes(&self) -> usize {
        self.weights.dims().0
    }

    pub fn n_inputs(&self) -> usize {
        self.weights.dims().1 - 1
    }

    pub fn to_backend(&self, backend: Backend) -> Layer<S> {
        Layer {
            weights: self.weights.convert(backend),
            activation: self.activation,
        }
    }

    pub fn cast<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Layer<T> {
        Layer {
            weights: self.weights.cast(f),
            activation: self.activation,
        }
    }
}

/// One fully-connected layer applied to a `1 x n_inputs` row:
/// `out_j = a(dot(W_j, [1, x]))`.
///
/// The output row is evaluated eagerly (in the weight matrix's backend) so
/// that a stack of lazy layers does not re-evaluate earlier layers on every
/// element query.
pub fn fc_forward<S: Scalar>(layer: &Layer<S>, input: &Matrix<S>) -> Result<Matrix<S>, NetworkError> {
    let backend = layer.weights.backend();
    if input.backend() == Backend::Dense && input.dims() != (1, layer.n_inputs()) {
        return Err(MatrixError::from(DimensionError::invalid_length("fc")).into());
    }
    let augmented = input.convert(backend).add_weight_coeff();
    let outputs = (0..layer.n_nodes())
        .map(|j| {
            let row = layer.weights.nth_row(j)?;
            let z = row.dot_product(&augmented)?;
            Ok(layer.activation.apply(&z))
        })
        .collect::<Result<Vec<S>, MatrixError>>()?;
    Ok(Matrix::row_vector(backend, outputs))
}

#[derive(Debug, Clone)]
pub struct Network<S> {
    input_arity: usize,
    layers: Vec<Layer<S>>,
}

impl<S: Scalar> Network<S> {
    pub fn new(input_arity: usize, layers: Vec<Layer<S>>) -> Result<Self, NetworkError> {
        if input_arity == 0 {
            return Err(NetworkError::ZeroArity);
        }
        let mut width = input_arity;
        for (k, layer) in layers.iter().enumerate() {
            if layer.n_inputs() != width {
                return Err(NetworkError::Shape {
                    layer: k,
                    expected: layer.n_inputs(),
                    got: width,
                });
            }
            width = layer.n_nodes();
        }
        Ok(Network {
            input_arity,
            layers,
        })
    }

    pub fn input_arity(&self) -> usize {
        self.input_arity
    }

    pub fn output_arity(&self) -> usize {
        self.layers.last().map_or(self.input_arity, Layer::n_nodes)
    }

    pub fn layers(&self) -> &[Layer<S>] {
        &self.layers
    }

    /// Backend of the weight matrices (dense for a network without layers).
    pub fn backend(&self) -> Backend {
        self.layers
            .first()
            .map_or(Backend::Dense, |l| l.weights.backend())
    }

    pub fn to_backend(&self, backend: Backend) -> Network<S> {
        Network {
            input_arity: self.input_arity,
            layers: self.layers.iter().map(|l| l.to_backend(backend)).collect(),
        }
    }

    pub fn cast<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Network<T> {
        Network {
            input_arity: self.input_arity,
            layers: self.layers.iter().map(|l| l.cast(&f)).collect(),
        }
    }

    /// Left-to-right composition of every layer.
    pub fn forward(&self, input: &Matrix<S>) -> Result<Matrix<S>, NetworkError> {
        self.layers
            .iter()
            .try_fold(input.clone(), |x, layer| fc_forward(layer, &x))
    }

    /// Forward pass on a plain input vector; the arity is checked for every
    /// backend.
    pub fn eval(&self, input: &[S]) -> Result<Vec<S>, NetworkError> {
        if input.len() != self.input_arity {
            return Err(NetworkError::Arity {
                expected: self.input_arity,
                got: input.len(),
            });
        }
        let x = Matrix::row_vector(self.backend(), input.to_vec());
        let y = self.forward(&x)?;
        let n = self.output_arity();
        (0..n)
            .map(|j| y.get(0, j).map_err(NetworkError::from))
            .collect()
    }

    /// Every non-bias weight as `(layer, row, col, value)`, where `col` is the
    /// weight-matrix column (always >= 1).
    pub fn non_bias_weights(&self) -> Vec<(usize, usize, usize, S)> {
        let mut out = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            for (i, row) in layer.weights.to_rows().into_iter().enumerate() {
                for (j, w) in row.into_iter().enumerate().skip(1) {
                    out.push((k, i, j, w));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassLabel {
    pub name: String,
    pub index: usize,
}

impl ClassLabel {
    pub fn from_names<T: AsRef<str>>(names: &[T]) -> Vec<ClassLabel> {
        names
            .iter()
            .enumerate()
            .map(|(index, n)| ClassLabel {
                name: n.as_ref().to_string(),
                index,
            })
            .collect()
    }
}

/// Index of the maximal value; ties go to the lowest index.
pub fn argmax<S: Scalar>(values: &[S]) -> Option<usize> {
    let mut best: Option<(usize, &S)> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Label of the maximal output of a `1 x k` row.
pub fn argmax_label<'a, S: Scalar>(
    output: &Matrix<S>,
    labels: &'a [ClassLabel],
) -> Result<&'a ClassLabel, NetworkError> {
    let (_, k) = output.dims();
    if k == 0 {
        return Err(NetworkError::EmptyOutput);
    }
    if labels.len() != k {
        return Err(NetworkError::LabelCount {
            labels: labels.len(),
            outputs: k,
        });
    }
    let values = (0..k)
        .map(|j| output.get(0, j))
        .collect::<Result<Vec<_>, _>>()?;
    let best = argmax(&values).ok_or(NetworkError::EmptyOutput)?;
    labels
        .iter()
        .find(|l| l.index == best)
        .ok_or(NetworkError::LabelCount {
            labels: labels.len(),
            outputs: k,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::Zero;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn layer(rows: Vec<Vec<Rational>>, act: Activation) -> Layer<Rational> {
        Layer::new(Matrix::from_rows(Backend::Dense, rows).unwrap(), act).unwrap()
    }

    #[test]
    fn relu_cases() {
        assert_eq!(relu(&r(-7, 2)), Rational::zero());
        assert_eq!(relu(&Rational::zero()), Rational::zero());
        assert_eq!(relu(&r(5, 1)), r(5, 1));
    }

    #[test]
    fn fc_bias_in_column_zero() {
        let l = layer(vec![vec![r(-10, 1), r(1, 1), r(1, 1)]], Activation::Relu);
        for b in Backend::ALL {
            let out = fc_forward(&l.to_backend(b), &Matrix::row_vector(b, vec![r(2, 1), r(3, 1)]))
                .unwrap();
            assert_eq!(out.dims(), (1, 1));
            assert_eq!(out.get(0, 0).unwrap(), Rational::zero());
        }
    }

    #[test]
    fn zero_weights_give_zero_outputs() {
        let l = layer(vec![vec![Rational::zero(); 3]; 4], Activation::Relu);
        let out = fc_forward(&l, &Matrix::row_vector(Backend::Dense, vec![r(9, 1), r(-9, 1)]))
            .unwrap();
        assert_eq!(out.to_rows(), vec![vec![Rational::zero(); 4]]);
    }

    #[test]
    fn dense_fc_checks_arity() {
        let l = layer(vec![vec![r(0, 1), r(1, 1)]], Activation::Identity);
        let err = fc_forward(&l, &Matrix::row_vector(Backend::Dense, vec![r(1, 1), r(2, 1)]))
            .unwrap_err();
        assert!(err.to_string().contains("invalid length"));
    }

    #[test]
    fn network_without_layers_is_identity() {
        let net = Network::<Rational>::new(3, vec![]).unwrap();
        let x = vec![r(1, 2), r(-3, 1), r(0, 1)];
        assert_eq!(net.eval(&x).unwrap(), x);
    }

    #[test]
    fn network_rejects_inconsistent_layers() {
        let a = layer(vec![vec![r(0, 1), r(1, 1)]; 2], Activation::Relu);
        let b = layer(vec![vec![r(0, 1), r(1, 1), r(1, 1), r(1, 1)]], Activation::Relu);
        assert!(matches!(
            Network::new(1, vec![a, b]),
            Err(NetworkError::Shape { layer: 1, expected: 3, got: 2 })
        ));
        assert!(matches!(Network::<Rational>::new(0, vec![]), Err(NetworkError::ZeroArity)));
        assert!(Layer::<Rational>::new(
            Matrix::from_entries(Backend::Record, 2, 0, []).unwrap(),
            Activation::Relu
        )
        .is_err());
    }

    #[test]
    fn eval_checks_arity() {
        let net = Network::new(2, vec![layer(vec![vec![r(0, 1), r(1, 1), r(1, 1)]], Activation::Relu)])
            .unwrap()
            .to_backend(Backend::Lazy);
        assert!(matches!(net.eval(&[r(1, 1)]), Err(NetworkError::Arity { expected: 2, got: 1 })));
    }

    #[test]
    fn argmax_ties_go_low() {
        let labels = ClassLabel::from_names(&["setosa", "versicolor", "virginica"]);
        let row = |v: Vec<Rational>| Matrix::row_vector(Backend::Dense, v);
        let pick = |v| argmax_label(&row(v), &labels).unwrap().name.clone();
        assert_eq!(pick(vec![r(1, 2), r(1, 5), r(3, 10)]), "setosa");
        assert_eq!(pick(vec![r(1, 1), r(1, 1), r(0, 1)]), "setosa");
        assert_eq!(pick(vec![r(0, 1), r(0, 1), r(1, 1)]), "virginica");
        assert_eq!(pick(vec![r(0, 1), r(2, 1), r(2, 1)]), "versicolor");
        assert!(argmax_label(&row(vec![]), &labels).is_err());
    }
}
