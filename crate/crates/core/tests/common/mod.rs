//! Seeded generators and reference implementations shared by the
//! integration tests.
#![allow(dead_code)]

use checknn::matrix::{Backend, Matrix};
use checknn::network::{Activation, Layer, Network};
use checknn::property::{InputBox, LinearAtom, Property, Relation};
use checknn::scalar::{QuantInt, Rational, Scalar};
use checknn::verify::Interval;
use num_traits::Zero;
use rand::Rng;

pub fn rat<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    Rational::from_ratio(rng.gen_range(-max_num..=max_num), rng.gen_range(1..=max_den))
}

pub fn nonneg_rat<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    Rational::from_ratio(rng.gen_range(0..=max_num), rng.gen_range(1..=max_den))
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Weights {
    Any,
    /// Non-bias weights nonnegative, biases of any sign.
    NonNeg,
}

/// Random network; about a third of the weights are zero.
pub fn random_net<R: Rng>(
    rng: &mut R,
    backend: Backend,
    arity: usize,
    depth: usize,
    max_nodes: usize,
    weights: Weights,
) -> Network<Rational> {
    let mut fan_in = arity;
    let mut layers = Vec::with_capacity(depth);
    for k in 0..depth {
        let nodes = rng.gen_range(1..=max_nodes);
        let rows = (0..nodes)
            .map(|_| {
                (0..=fan_in)
                    .map(|j| {
                        if rng.gen_bool(0.3) {
                            Rational::zero()
                        } else if j > 0 && weights == Weights::NonNeg {
                            nonneg_rat(rng, 9, 4)
                        } else {
                            rat(rng, 9, 4)
                        }
                    })
                    .collect()
            })
            .collect();
        let activation = if k + 1 == depth && rng.gen_bool(0.5) {
            Activation::Identity
        } else {
            Activation::Relu
        };
        layers.push(Layer::new(Matrix::from_rows(backend, rows).unwrap(), activation).unwrap());
        fan_in = nodes;
    }
    Network::new(arity, layers).unwrap()
}

/// Random integer-weight network with weights in `[-max_abs, max_abs]`.
pub fn random_qnet<R: Rng>(
    rng: &mut R,
    arity: usize,
    depth: usize,
    max_nodes: usize,
    max_abs: i64,
) -> Network<QuantInt> {
    let mut fan_in = arity;
    let mut layers = Vec::with_capacity(depth);
    for k in 0..depth {
        let nodes = if k + 1 == depth { rng.gen_range(1..=2) } else { rng.gen_range(1..=max_nodes) };
        let rows = (0..nodes)
            .map(|_| (0..=fan_in).map(|_| QuantInt::from(rng.gen_range(-max_abs..=max_abs))).collect())
            .collect();
        let activation = if k + 1 == depth { Activation::Identity } else { Activation::Relu };
        layers.push(Layer::new(Matrix::from_rows(Backend::Dense, rows).unwrap(), activation).unwrap());
        fan_in = nodes;
    }
    Network::new(arity, layers).unwrap()
}

pub fn random_box<R: Rng>(rng: &mut R, arity: usize) -> Vec<Interval> {
    (0..arity)
        .map(|_| {
            let a = rat(rng, 20, 4);
            let b = &a + &nonneg_rat(rng, 12, 3);
            Interval::new(a, b).unwrap()
        })
        .collect()
}

/// Uniform point with denominator up to 1000; corners are drawn with
/// probability 1/5 per coordinate.
pub fn sample_point<R: Rng>(rng: &mut R, bounds: &[Interval]) -> Vec<Rational> {
    bounds
        .iter()
        .map(|iv| match rng.gen_range(0..10) {
            0 => iv.lo().clone(),
            1 => iv.hi().clone(),
            _ => {
                let t = Rational::from_ratio(rng.gen_range(0..=1000), 1000);
                iv.lo() + &(&t * &iv.width())
            }
        })
        .collect()
}

/// Reference forward pass over plain vectors, reading weights via `get`.
pub fn reference_forward<S: Scalar>(net: &Network<S>, x: &[Rational]) -> Vec<Rational> {
    let mut v = x.to_vec();
    for layer in net.layers() {
        let w = layer.weights();
        let (rows, cols) = w.dims();
        v = (0..rows)
            .map(|i| {
                let mut acc = w.get(i, 0).unwrap().to_rational();
                for j in 1..cols {
                    acc = &acc + &(&w.get(i, j).unwrap().to_rational() * &v[j - 1]);
                }
                match layer.activation() {
                    Activation::Relu if acc.is_negative() => Rational::zero(),
                    _ => acc,
                }
            })
            .collect();
    }
    v
}

/// Single-atom property `c0*y0 + c1*y1 <rel> bound` over `bounds`.
pub fn atom_property(
    bounds: Vec<Interval>,
    coefficients: Vec<(usize, Rational)>,
    relation: Relation,
    bound: Rational,
) -> Option<Property> {
    let atom = LinearAtom::new(coefficients, relation, bound)?;
    Property::new("generated", InputBox::new(bounds), vec![atom]).ok()
}

pub fn random_relation<R: Rng>(rng: &mut R) -> Relation {
    [Relation::Le, Relation::Lt, Relation::Ge, Relation::Gt][rng.gen_range(0..4)]
}
