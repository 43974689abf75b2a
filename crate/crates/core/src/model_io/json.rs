//! Sparse JSON model documents.
//!
//! ```json
//! {"input_arity":2,"layers":[{"activation":"relu","cols":3,"entries":[[0,0,"1"],[0,2,"-0.5"]],"rows":1}],"scalar":"rational"}
//! ```
//!
//! Keys are written in sorted order and entries in row-major order with zeros
//! omitted, so saving a loaded document yields its canonical form. Values are
//! decimal strings, or `numer/denom` when the decimal does not terminate.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{Model, ModelError};
use crate::matrix::{Backend, Matrix};
use crate::network::{Activation, Layer, Network};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseModelDoc {
    pub input_arity: usize,
    pub layers: Vec<SparseLayerDoc>,
    #[serde(default = "default_scalar")]
    pub scalar: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SparseLayerDoc {
    pub activation: String,
    pub cols: usize,
    pub entries: Vec<(usize, usize, String)>,
    pub rows: usize,
}

fn default_scalar() -> String {
    Rational::KIND.to_string()
}

fn render(x: &Rational) -> String {
    x.to_decimal_string().unwrap_or_else(|| x.to_string())
}

fn network_doc<S: Scalar>(net: &Network<S>, scale: Option<&BigInt>) -> SparseModelDoc {
    let layers = net
        .layers()
        .iter()
        .map(|layer| {
            let record = layer.weights().to_record();
            let (rows, cols) = record.dims();
            SparseLayerDoc {
                activation: layer.activation().name().to_string(),
                cols,
                entries: record
                    .entries()
                    .iter()
                    .map(|(&(i, j), v)| (i, j, render(&v.to_rational())))
                    .collect(),
                rows,
            }
        })
        .collect();
    SparseModelDoc {
        input_arity: net.input_arity(),
        layers,
        scalar: S::KIND.to_string(),
        scale: scale.map(BigInt::to_string),
    }
}

impl SparseModelDoc {
    pub fn from_model(model: &Model) -> Self {
        match model {
            Model::Rational(net) => network_doc(net, None),
            Model::Quantised { network, scale } => network_doc(network, scale.as_ref()),
        }
    }

    pub fn to_model(&self, backend: Backend) -> Result<Model, ModelError> {
        match self.scalar.as_str() {
            "rational" => {
                if self.scale.is_some() {
                    return Err(ModelError::Document("scale given for a rational model".into()));
                }
                Ok(Model::Rational(self.network(backend)?))
            }
            "quantised" => {
                let scale = self
                    .scale
                    .as_deref()
                    .map(|s| {
                        s.parse::<BigInt>()
                            .map_err(|_| ModelError::Document(format!("malformed scale {s:?}")))
                    })
                    .transpose()?;
                Ok(Model::Quantised {
                    network: self.network(backend)?,
                    scale,
                })
            }
            other => Err(ModelError::Document(format!("unknown scalar kind {other:?}"))),
        }
    }

    fn network<S: Scalar + std::str::FromStr>(&self, backend: Backend) -> Result<Network<S>, ModelError> {
        let mut layers = Vec::with_capacity(self.layers.len());
        for (k, layer) in self.layers.iter().enumerate() {
            let bad = |msg: String| ModelError::Document(format!("layer {k}: {msg}"));
            let activation: Activation = layer.activation.parse().map_err(bad)?;
            if layer.cols == 0 {
                return Err(bad("a weight matrix needs a bias column".into()));
            }
            let mut seen = BTreeSet::new();
            let mut entries = Vec::with_capacity(layer.entries.len());
            for (i, j, text) in &layer.entries {
                let (i, j) = (*i, *j);
                if i >= layer.rows || j >= layer.cols {
                    return Err(bad(format!(
                        "entry ({i}, {j}) outside {}x{}",
                        layer.rows, layer.cols
                    )));
                }
                if !seen.insert((i, j)) {
                    return Err(bad(format!("duplicate entry ({i}, {j})")));
                }
                let value: S = text
                    .parse()
                    .map_err(|_| bad(format!("malformed {} value {text:?}", S::KIND)))?;
                if value.is_zero() {
                    return Err(bad(format!("zero entry ({i}, {j}) must be omitted")));
                }
                entries.push(((i, j), value));
            }
            let weights = Matrix::from_entries(backend, layer.rows, layer.cols, entries)?;
            layers.push(Layer::new(weights, activation)?);
        }
        Ok(Network::new(self.input_arity, layers)?)
    }
}

pub fn save_json(model: &Model) -> String {
    let mut text = serde_json::to_string(&SparseModelDoc::from_model(model))
        .expect("model documents always serialise");
    text.push('\n');
    text
}

pub fn load_json(text: &str, backend: Backend) -> Result<Model, ModelError> {
    let doc: SparseModelDoc =
        serde_json::from_str(text).map_err(|e| ModelError::Document(e.to_string()))?;
    doc.to_model(backend)
}
