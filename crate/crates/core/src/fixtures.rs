//! Bundled example models and properties.
//!
//! The ACAS-layout NNet file has the shape of the ACAS Xu networks but its
//! weights are seeded pseudo-random values. Property files are samples.

use crate::matrix::Backend;
use crate::model_io::{load_json, Model, NNetModel};
use crate::network::{ClassLabel, Network};
use crate::property::Property;
use crate::scalar::Rational;

pub const IRIS_JSON: &str = include_str!("../fixtures/iris.json");
pub const IRIS_LABELS: &str = include_str!("../fixtures/iris.labels");
pub const IRIS_SAMPLES_CSV: &str = include_str!("../fixtures/iris_samples.csv");
pub const LAYER5_LAYER6_JSON: &str = include_str!("../fixtures/layer5_layer6.json");
pub const ACAS_LAYOUT_NNET: &str = include_str!("../fixtures/acas_layout.nnet");
pub const ACAS_SAMPLE_PROPERTY: &str = include_str!("../fixtures/properties/acas_sample_minimal.prop");
pub const IRIS_SETOSA_PROPERTY: &str = include_str!("../fixtures/properties/iris_setosa_box.prop");
pub const IRIS_FALSE_PROPERTY: &str =
    include_str!("../fixtures/properties/iris_versicolor_positive.prop");

fn rational_model(text: &str, backend: Backend) -> Network<Rational> {
    match load_json(text, backend).expect("bundled model is valid") {
        Model::Rational(net) => net,
        Model::Quantised { .. } => unreachable!("bundled model is rational"),
    }
}

pub fn iris(backend: Backend) -> Network<Rational> {
    rational_model(IRIS_JSON, backend)
}

pub fn iris_labels() -> Vec<ClassLabel> {
    ClassLabel::from_names(&IRIS_LABELS.lines().collect::<Vec<_>>())
}

/// The bundled Iris samples with their expected labels.
pub fn iris_samples() -> Vec<(Vec<Rational>, String)> {
    IRIS_SAMPLES_CSV
        .lines()
        .skip(1)
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            let (label, values) = fields.split_last().expect("nonempty row");
            let values = values
                .iter()
                .map(|v| v.parse().expect("bundled sample is numeric"))
                .collect();
            (values, label.to_string())
        })
        .collect()
}

pub fn layer5_layer6(backend: Backend) -> Network<Rational> {
    rational_model(LAYER5_LAYER6_JSON, backend)
}

pub fn acas_layout(backend: Backend) -> NNetModel {
    NNetModel::parse(ACAS_LAYOUT_NNET, backend).expect("bundled NNet file is valid")
}

pub fn property(text: &str) -> Property {
    Property::parse(text).expect("bundled property is valid")
}
