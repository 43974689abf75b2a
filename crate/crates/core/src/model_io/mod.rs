//! Model ingestion (NNet text, sparse JSON) and model transforms.

mod json;
mod nnet;
mod transform;

use std::path::Path;

use num_bigint::BigInt;
use thiserror::Error;

pub use json::{load_json, save_json, SparseLayerDoc, SparseModelDoc};
pub use nnet::{load_nnet, NNetModel, Normalization};
pub use transform::{
    kept_positions, output_scale, prune, pruned_positions, quantization_error, quantize, WeightPos,
};

use crate::matrix::{Backend, MatrixError};
use crate::network::{Network, NetworkError};
use crate::scalar::{QuantInt, Rational};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: missing section `{section}`")]
    Missing { section: String, line: usize },
    #[error("inconsistent shape: {0}")]
    Shape(String),
    #[error("malformed model document: {0}")]
    Document(String),
    #[error("expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("prune fraction must lie in [0, 1), got {0}")]
    Fraction(Rational),
    #[error("quantisation scale must be at least 1")]
    Scale,
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<MatrixError> for ModelError {
    fn from(e: MatrixError) -> Self {
        ModelError::Network(e.into())
    }
}

/// A loaded network of either scalar kind.
#[derive(Debug, Clone)]
pub enum Model {
    Rational(Network<Rational>),
    Quantised {
        network: Network<QuantInt>,
        /// Scale the network was quantised with, when known.
        scale: Option<BigInt>,
    },
}

impl Model {
    pub fn input_arity(&self) -> usize {
        match self {
            Model::Rational(n) => n.input_arity(),
            Model::Quantised { network, .. } => network.input_arity(),
        }
    }

    pub fn output_arity(&self) -> usize {
        match self {
            Model::Rational(n) => n.output_arity(),
            Model::Quantised { network, .. } => network.output_arity(),
        }
    }

    pub fn to_backend(&self, backend: Backend) -> Model {
        match self {
            Model::Rational(n) => Model::Rational(n.to_backend(backend)),
            Model::Quantised { network, scale } => Model::Quantised {
                network: network.to_backend(backend),
                scale: scale.clone(),
            },
        }
    }

    pub fn is_quantised(&self) -> bool {
        matches!(self, Model::Quantised { .. })
    }
}

/// Model file plus the NNet normalisation metadata when it came from one.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: Model,
    pub normalization: Option<Normalization>,
}

/// Loads `.nnet` files as NNet text and anything else as a sparse JSON
/// document.
pub fn load_model(path: impl AsRef<Path>, backend: Backend) -> Result<LoadedModel, ModelError> {
    let path = path.as_ref();
    let is_nnet = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("nnet"));
    if is_nnet {
        let nnet = load_nnet(path, backend)?;
        Ok(LoadedModel {
            model: Model::Rational(nnet.network),
            normalization: Some(nnet.normalization),
        })
    } else {
        let text = std::fs::read_to_string(path)?;
        Ok(LoadedModel {
            model: load_json(&text, backend)?,
            normalization: None,
        })
    }
}
