//! Magnitude pruning and integer quantisation.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::ModelError;
use crate::matrix::Matrix;
use crate::network::{Layer, Network};
use crate::scalar::{QuantInt, Rational, Scalar};

/// Position of a non-bias weight: (layer, row, weight-matrix column).
pub type WeightPos = (usize, usize, usize);

/// Zeroes the `floor(fraction * n)` smallest-magnitude non-bias weights,
/// ranked globally across layers. Ties are broken by position
/// `(layer, row, col)`, so kept sets nest as the fraction grows. Biases and
/// shapes are left unchanged.
pub fn prune<S: Scalar>(net: &Network<S>, fraction: &Rational) -> Result<Network<S>, ModelError> {
    if fraction.is_negative() || *fraction >= Rational::one() {
        return Err(ModelError::Fraction(fraction.clone()));
    }
    let removed = pruned_positions(net, fraction);
    if removed.is_empty() {
        return Ok(net.clone());
    }
    let layers = net
        .layers()
        .iter()
        .enumerate()
        .map(|(k, layer)| {
            let record = layer.weights().to_record();
            let (rows, cols) = record.dims();
            let entries = record
                .entries()
                .iter()
                .filter(|(&(i, j), _)| !removed.contains(&(k, i, j)))
                .map(|(&key, v)| (key, v.clone()));
            let weights = Matrix::from_entries(layer.weights().backend(), rows, cols, entries)?;
            Ok(Layer::new(weights, layer.activation())?)
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    Ok(Network::new(net.input_arity(), layers)?)
}

/// The positions `prune` would zero at `fraction`.
pub fn pruned_positions<S: Scalar>(net: &Network<S>, fraction: &Rational) -> BTreeSet<WeightPos> {
    let mut ranked: Vec<(S, WeightPos)> = net
        .non_bias_weights()
        .into_iter()
        .map(|(k, i, j, w)| (w.abs(), (k, i, j)))
        .collect();
    let count = (fraction * &Rational::from(ranked.len() as i64)).floor();
    let count = usize::try_from(count).unwrap_or(0);
    ranked.sort();
    ranked.into_iter().take(count).map(|(_, pos)| pos).collect()
}

/// Positions of nonzero non-bias weights.
pub fn kept_positions<S: Scalar>(net: &Network<S>) -> BTreeSet<WeightPos> {
    net.non_bias_weights()
        .into_iter()
        .filter(|(_, _, _, w)| !w.is_zero())
        .map(|(k, i, j, _)| (k, i, j))
        .collect()
}

/// Integer network approximating `scale^(k+1)` times the output of layer `k`.
///
/// Weights become `round(w * scale)`. The bias of layer `k` (0-based) becomes
/// `round(b * scale^(k+1))`, matching the scale the layer's weighted sum
/// already carries, so ReLU commutes with the scaling at every depth.
/// Rounding is half away from zero.
pub fn quantize(net: &Network<Rational>, scale: &BigInt) -> Result<Network<QuantInt>, ModelError> {
    if scale < &BigInt::one() {
        return Err(ModelError::Scale);
    }
    let weight_scale = Rational::from_integer(scale.clone());
    let mut bias_scale = Rational::one();
    let mut layers = Vec::with_capacity(net.layers().len());
    for layer in net.layers() {
        bias_scale = &bias_scale * &weight_scale;
        let record = layer.weights().to_record();
        let (rows, cols) = record.dims();
        let entries = record.entries().iter().map(|(&(i, j), v)| {
            let factor = if j == 0 { &bias_scale } else { &weight_scale };
            ((i, j), QuantInt::new((v * factor).round_half_away()))
        });
        let weights = Matrix::from_entries(layer.weights().backend(), rows, cols, entries)?;
        layers.push(Layer::new(weights, layer.activation())?);
    }
    Ok(Network::new(net.input_arity(), layers)?)
}

/// Output scale of a network quantised with `scale`: `scale^depth`.
pub fn output_scale(scale: &BigInt, depth: usize) -> BigInt {
    num_traits::pow(scale.clone(), depth)
}

/// Largest `|q / factor - w|` over all weights and biases, where `factor` is
/// the scale applied to that entry by [`quantize`].
pub fn quantization_error(
    net: &Network<Rational>,
    quantised: &Network<QuantInt>,
    scale: &BigInt,
) -> Rational {
    let mut worst = Rational::zero();
    let mut bias_factor = Rational::one();
    let weight_factor = Rational::from_integer(scale.clone());
    for (real, quant) in net.layers().iter().zip(quantised.layers()) {
        bias_factor = &bias_factor * &weight_factor;
        for (rrow, qrow) in real.weights().to_rows().iter().zip(quant.weights().to_rows()) {
            for (j, (w, q)) in rrow.iter().zip(qrow).enumerate() {
                let factor = if j == 0 { &bias_factor } else { &weight_factor };
                let back = q.to_rational().checked_div(factor).expect("scale >= 1");
                let err = (&back - w).abs();
                worst = Rational::max_of(&worst, &err);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Backend;
    use crate::network::Activation;

    fn r(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    /// 2 layers, 10 non-bias weights with distinct magnitudes.
    fn toy() -> Network<Rational> {
        let l0 = Layer::new(
            Matrix::from_rows(
                Backend::Dense,
                vec![
                    vec![r(1, 2), r(1, 1), r(-2, 1), r(3, 1)],
                    vec![r(-1, 3), r(-4, 1), r(5, 1), r(-6, 1)],
                ],
            )
            .unwrap(),
            Activation::Relu,
        )
        .unwrap();
        let l1 = Layer::new(
            Matrix::from_rows(
                Backend::Dense,
                vec![
                    vec![r(7, 1), r(7, 10), r(-8, 10)],
                    vec![r(0, 1), r(9, 10), r(1, 10)],
                ],
            )
            .unwrap(),
            Activation::Identity,
        )
        .unwrap();
        Network::new(3, vec![l0, l1]).unwrap()
    }

    #[test]
    fn fraction_zero_is_identity() {
        let net = toy();
        let pruned = prune(&net, &Rational::zero()).unwrap();
        assert_eq!(kept_positions(&pruned), kept_positions(&net));
        for (a, b) in pruned.layers().iter().zip(net.layers()) {
            assert!(a.weights().same_elements(b.weights()));
        }
    }

    #[test]
    fn ninety_percent_leaves_one_weight() {
        let net = toy();
        assert_eq!(net.non_bias_weights().len(), 10);
        for b in Backend::ALL {
            let pruned = prune(&net.to_backend(b), &r(9, 10)).unwrap();
            let kept = kept_positions(&pruned);
            assert_eq!(kept, BTreeSet::from([(0, 1, 3)]), "backend {b}");
            // biases untouched
            assert_eq!(pruned.layers()[0].weights().get(0, 0).unwrap(), r(1, 2));
            assert_eq!(pruned.layers()[1].weights().get(0, 0).unwrap(), r(7, 1));
        }
    }

    #[test]
    fn ties_break_by_position() {
        let l = Layer::new(
            Matrix::from_rows(Backend::Dense, vec![vec![r(0, 1), r(1, 1), r(-1, 1), r(1, 1)]])
                .unwrap(),
            Activation::Relu,
        )
        .unwrap();
        let net = Network::new(3, vec![l]).unwrap();
        let removed = pruned_positions(&net, &r(2, 3));
        assert_eq!(removed, BTreeSet::from([(0, 0, 1), (0, 0, 2)]));
    }

    #[test]
    fn invalid_fraction_rejected() {
        assert!(prune(&toy(), &r(1, 1)).is_err());
        assert!(prune(&toy(), &r(-1, 10)).is_err());
    }

    #[test]
    fn quantize_examples() {
        let l = Layer::new(
            Matrix::from_rows(Backend::Record, vec![vec![r(0, 1), r(2687, 50000)]]).unwrap(),
            Activation::Identity,
        )
        .unwrap();
        let net = Network::new(1, vec![l]).unwrap();
        let q = quantize(&net, &BigInt::from(1000)).unwrap();
        assert_eq!(q.layers()[0].weights().get(0, 1).unwrap(), QuantInt::from(54));

        let ints = toy().cast(|w| Rational::from_integer(w.round_half_away()));
        let q = quantize(&ints, &BigInt::from(1)).unwrap();
        for (a, b) in q.layers().iter().zip(ints.layers()) {
            assert!(a.weights().cast(|x| x.to_rational()).same_elements(b.weights()));
        }
        assert!(quantize(&toy(), &BigInt::from(0)).is_err());
    }

    #[test]
    fn quantization_error_bound() {
        let net = toy();
        for s in [1, 7, 10, 1000] {
            let scale = BigInt::from(s);
            let q = quantize(&net, &scale).unwrap();
            assert!(quantization_error(&net, &q, &scale) <= r(1, 2 * s));
        }
    }
}
