//! Reader and writer for the NNet text format used by the ACAS Xu networks.
//!
//! Layout, after any number of `//` comment lines:
//!
//! ```text
//! numLayers, inputSize, outputSize, maxLayerSize,
//! layerSize_0, layerSize_1, ..., layerSize_numLayers,
//! flag,
//! input minimums
//! input maximums
//! means   (inputSize values, optionally one more for the outputs)
//! ranges  (same)
//! per layer: one line per node of comma-separated weights, then one line
//!            per node holding its bias
//! ```
//!
//! Values are comma separated; trailing commas are tolerated. Every decimal is
//! parsed exactly.

use std::path::Path;

use super::ModelError;
use crate::matrix::{Backend, Matrix};
use crate::network::{Activation, Layer, Network};
use crate::scalar::Rational;

/// Input normalisation metadata carried by an NNet file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalization {
    pub input_mins: Vec<Rational>,
    pub input_maxes: Vec<Rational>,
    pub means: Vec<Rational>,
    pub ranges: Vec<Rational>,
    pub output_mean: Option<Rational>,
    pub output_range: Option<Rational>,
}

impl Normalization {
    pub fn arity(&self) -> usize {
        self.means.len()
    }

    /// `(clamp(raw, min, max) - mean) / range` per input.
    pub fn normalize_input(&self, raw: &[Rational]) -> Result<Vec<Rational>, ModelError> {
        self.check_arity(raw.len())?;
        Ok(raw
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let clamped =
                    Rational::min_of(&Rational::max_of(x, &self.input_mins[i]), &self.input_maxes[i]);
                (&clamped - &self.means[i])
                    .checked_div(&self.ranges[i])
                    .expect("ranges are nonzero")
            })
            .collect())
    }

    /// `x * range + mean` per input.
    pub fn denormalize_input(&self, normalized: &[Rational]) -> Result<Vec<Rational>, ModelError> {
        self.check_arity(normalized.len())?;
        Ok(normalized
            .iter()
            .enumerate()
            .map(|(i, x)| &(x * &self.ranges[i]) + &self.means[i])
            .collect())
    }

    fn check_arity(&self, got: usize) -> Result<(), ModelError> {
        if got != self.arity() {
            return Err(ModelError::Arity {
                expected: self.arity(),
                got,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NNetModel {
    pub layer_sizes: Vec<usize>,
    pub normalization: Normalization,
    pub network: Network<Rational>,
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate().peekable(),
            last_line: 0,
        }
    }

    /// Next non-blank, non-comment line as (1-based line number, tokens).
    fn next_record(&mut self, section: &str) -> Result<(usize, Vec<&'a str>), ModelError> {
        for (idx, line) in self.inner.by_ref() {
            self.last_line = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with("//") {
                continue;
            }
            let tokens = trimmed
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .collect();
            return Ok((idx + 1, tokens));
        }
        Err(ModelError::Missing {
            section: section.to_string(),
            line: self.last_line + 1,
        })
    }

    fn rationals(&mut self, section: &str, count: usize) -> Result<Vec<Rational>, ModelError> {
        let (line, tokens) = self.next_record(section)?;
        if tokens.len() != count {
            return Err(ModelError::Parse {
                line,
                message: format!("{section}: expected {count} values, found {}", tokens.len()),
            });
        }
        parse_tokens(line, section, &tokens)
    }

    fn integers(&mut self, section: &str, count: usize) -> Result<Vec<usize>, ModelError> {
        let (line, tokens) = self.next_record(section)?;
        if tokens.len() < count {
            return Err(ModelError::Parse {
                line,
                message: format!("{section}: expected {count} values, found {}", tokens.len()),
            });
        }
        tokens[..count]
            .iter()
            .map(|t| {
                t.parse::<usize>().map_err(|_| ModelError::Parse {
                    line,
                    message: format!("{section}: expected a nonnegative integer, found {t:?}"),
                })
            })
            .collect()
    }
}

fn parse_tokens(line: usize, section: &str, tokens: &[&str]) -> Result<Vec<Rational>, ModelError> {
    tokens
        .iter()
        .map(|t| {
            Rational::from_decimal_str(t).map_err(|_| ModelError::Parse {
                line,
                message: format!("{section}: malformed number {t:?}"),
            })
        })
        .collect()
}

impl NNetModel {
    pub fn parse(text: &str, backend: Backend) -> Result<Self, ModelError> {
        let mut lines = Lines::new(text);
        let header = lines.integers("header", 4)?;
        let (num_layers, input_size, output_size, max_layer_size) =
            (header[0], header[1], header[2], header[3]);
        if num_layers == 0 {
            return Err(ModelError::Shape("network has no layers".into()));
        }
        let layer_sizes = lines.integers("layer sizes", num_layers + 1)?;
        if layer_sizes.contains(&0) {
            return Err(ModelError::Shape("layer sizes must be positive".into()));
        }
        if layer_sizes[0] != input_size
            || layer_sizes[num_layers] != output_size
            || layer_sizes.iter().max() != Some(&max_layer_size)
        {
            return Err(ModelError::Shape(format!(
                "header ({input_size} inputs, {output_size} outputs, max {max_layer_size}) \
                 disagrees with layer sizes {layer_sizes:?}"
            )));
        }
        lines.next_record("flag")?;
        let input_mins = lines.rationals("input minimums", input_size)?;
        let input_maxes = lines.rationals("input maximums", input_size)?;
        let (means, output_mean) = split_output_stat(&mut lines, "means", input_size)?;
        let (ranges, output_range) = split_output_stat(&mut lines, "ranges", input_size)?;
        if ranges.iter().chain(&output_range).any(num_traits::Zero::is_zero) {
            return Err(ModelError::Shape("ranges must be nonzero".into()));
        }
        if input_mins.iter().zip(&input_maxes).any(|(lo, hi)| lo > hi) {
            return Err(ModelError::Shape("input minimum exceeds maximum".into()));
        }

        let mut layers = Vec::with_capacity(num_layers);
        for k in 0..num_layers {
            let (fan_in, nodes) = (layer_sizes[k], layer_sizes[k + 1]);
            let weight_section = format!("layer {k} weights");
            let mut rows = Vec::with_capacity(nodes);
            for _ in 0..nodes {
                rows.push(lines.rationals(&weight_section, fan_in)?);
            }
            let bias_section = format!("layer {k} biases");
            for row in rows.iter_mut() {
                let bias = lines.rationals(&bias_section, 1)?;
                row.insert(0, bias.into_iter().next().expect("one value"));
            }
            let activation = if k + 1 == num_layers {
                Activation::Identity
            } else {
                Activation::Relu
            };
            let weights = Matrix::from_rows(backend, rows)?;
            layers.push(Layer::new(weights, activation)?);
        }
        let network = Network::new(input_size, layers)?;
        Ok(NNetModel {
            layer_sizes,
            normalization: Normalization {
                input_mins,
                input_maxes,
                means,
                ranges,
                output_mean,
                output_range,
            },
            network,
        })
    }

    /// Renders the model back to NNet text. Terminating values are written
    /// exactly; others with 17 significant digits.
    pub fn to_text(&self) -> String {
        let render = |x: &Rational| x.to_decimal_string().unwrap_or_else(|| x.to_sig_string(17));
        let join = |xs: &[Rational]| {
            let mut s = xs.iter().map(render).collect::<Vec<_>>().join(",");
            s.push(',');
            s
        };
        let sizes = &self.layer_sizes;
        let n = sizes.len() - 1;
        let max = sizes.iter().max().copied().unwrap_or(0);
        let mut out = String::new();
        out.push_str("// Neural network in NNet format\n");
        out.push_str(&format!("{n},{},{},{max},\n", sizes[0], sizes[n]));
        out.push_str(&sizes.iter().map(|s| format!("{s},")).collect::<String>());
        out.push('\n');
        out.push_str("0,\n");
        let norm = &self.normalization;
        out.push_str(&join(&norm.input_mins));
        out.push('\n');
        out.push_str(&join(&norm.input_maxes));
        out.push('\n');
        let with_output = |xs: &[Rational], extra: &Option<Rational>| {
            let mut v = xs.to_vec();
            v.extend(extra.iter().cloned());
            join(&v)
        };
        out.push_str(&with_output(&norm.means, &norm.output_mean));
        out.push('\n');
        out.push_str(&with_output(&norm.ranges, &norm.output_range));
        out.push('\n');
        for layer in self.network.layers() {
            let rows = layer.weights().to_rows();
            for row in &rows {
                out.push_str(&join(&row[1..]));
                out.push('\n');
            }
            for row in &rows {
                out.push_str(&join(&row[..1]));
                out.push('\n');
            }
        }
        out
    }
}

fn split_output_stat(
    lines: &mut Lines<'_>,
    section: &str,
    input_size: usize,
) -> Result<(Vec<Rational>, Option<Rational>), ModelError> {
    let (line, tokens) = lines.next_record(section)?;
    if tokens.len() != input_size && tokens.len() != input_size + 1 {
        return Err(ModelError::Parse {
            line,
            message: format!(
                "{section}: expected {input_size} or {} values, found {}",
                input_size + 1,
                tokens.len()
            ),
        });
    }
    let mut values = parse_tokens(line, section, &tokens)?;
    let output = (values.len() > input_size).then(|| values.pop().expect("nonempty"));
    Ok((values, output))
}

pub fn load_nnet(path: impl AsRef<Path>, backend: Backend) -> Result<NNetModel, ModelError> {
    let text = std::fs::read_to_string(path)?;
    NNetModel::parse(&text, backend)
}
