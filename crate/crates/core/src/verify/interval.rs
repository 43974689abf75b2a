//! Closed rational intervals and interval bound propagation.

use std::fmt;

use num_traits::Zero;

use crate::network::{Activation, Layer, Network, NetworkError};
use crate::property::{LinearAtom, Relation};
use crate::scalar::{Rational, Scalar};

/// Closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    /// Returns the offending bounds when `lo > hi`.
    #[allow(clippy::result_large_err)]
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, (Rational, Rational)> {
        if lo > hi {
            return Err((lo, hi));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: Rational) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        Rational::midpoint(&self.lo, &self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    /// `{c * x : x in self}`.
    pub fn scale(&self, c: &Rational) -> Interval {
        let (a, b) = (c * &self.lo, c * &self.hi);
        if c.is_negative() {
            Interval { lo: b, hi: a }
        } else {
            Interval { lo: a, hi: b }
        }
    }

    pub fn relu(&self) -> Interval {
        let zero = Rational::zero();
        Interval {
            lo: Rational::max_of(&zero, &self.lo),
            hi: Rational::max_of(&zero, &self.hi),
        }
    }

    fn activate(&self, activation: Activation) -> Interval {
        match activation {
            Activation::Relu => self.relu(),
            Activation::Identity => self.clone(),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// One closed interval per dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntervalVector(Vec<Interval>);

impl IntervalVector {
    pub fn new(dims: Vec<Interval>) -> Self {
        IntervalVector(dims)
    }

    pub fn from_point(point: &[Rational]) -> Self {
        IntervalVector(point.iter().cloned().map(Interval::point).collect())
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn dims(&self) -> &[Interval] {
        &self.0
    }

    pub fn into_dims(self) -> Vec<Interval> {
        self.0
    }

    pub fn contains_point(&self, point: &[Rational]) -> bool {
        point.len() == self.0.len() && self.0.iter().zip(point).all(|(iv, x)| iv.contains(x))
    }

    /// Dimensionwise containment of `other` in `self`.
    pub fn contains(&self, other: &IntervalVector) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| a.contains_interval(b))
    }

    pub fn center(&self) -> Vec<Rational> {
        self.0.iter().map(Interval::midpoint).collect()
    }

    /// Index of the widest dimension, lowest index on ties.
    pub fn widest(&self) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for (i, iv) in self.0.iter().enumerate() {
            let w = iv.width();
            if best.as_ref().is_none_or(|(_, b)| w > *b) {
                best = Some((i, w));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Copy with dimension `i` replaced.
    pub fn with_dim(&self, i: usize, iv: Interval) -> IntervalVector {
        let mut dims = self.0.clone();
        dims[i] = iv;
        IntervalVector(dims)
    }
}

/// Sound enclosure of `fc_forward(layer, x)` over every `x` in `input`.
///
/// Node `j` gets `b_j + sum(w * [l, u])` with the product taken endpoint by
/// sign, then the activation is applied to both ends.
pub fn interval_affine<S: Scalar>(
    layer: &Layer<S>,
    input: &IntervalVector,
) -> Result<IntervalVector, NetworkError> {
    if input.arity() != layer.n_inputs() {
        return Err(NetworkError::Arity {
            expected: layer.n_inputs(),
            got: input.arity(),
        });
    }
    let weights = layer.weights();
    let nodes = (0..layer.n_nodes())
        .map(|j| {
            let mut acc = Interval::point(Rational::zero());
            for (c, w) in weights.row_terms(j) {
                let w = w.to_rational();
                acc = if c == 0 {
                    acc.add(&Interval::point(w))
                } else {
                    acc.add(&input.dims()[c - 1].scale(&w))
                };
            }
            acc.activate(layer.activation())
        })
        .collect();
    Ok(IntervalVector(nodes))
}

/// Output enclosure of the whole network.
pub fn propagate<S: Scalar>(
    net: &Network<S>,
    input: &IntervalVector,
) -> Result<IntervalVector, NetworkError> {
    if input.arity() != net.input_arity() {
        return Err(NetworkError::Arity {
            expected: net.input_arity(),
            got: input.arity(),
        });
    }
    net.layers()
        .iter()
        .try_fold(input.clone(), |acc, layer| interval_affine(layer, &acc))
}

/// Enclosure of an atom's left-hand side given output bounds.
pub fn atom_bounds(atom: &LinearAtom, outputs: &IntervalVector) -> Interval {
    atom.coefficients()
        .iter()
        .fold(Interval::point(Rational::zero()), |acc, (&k, c)| {
            acc.add(&outputs.dims()[k].scale(c))
        })
}

/// True when the bounds alone establish the atom on the whole box. Strict
/// relations need strict separation.
pub fn atom_proved(atom: &LinearAtom, outputs: &IntervalVector) -> bool {
    let lhs = atom_bounds(atom, outputs);
    let d = atom.bound();
    match atom.relation() {
        Relation::Le => lhs.hi() <= d,
        Relation::Lt => lhs.hi() < d,
        Relation::Ge => lhs.lo() >= d,
        Relation::Gt => lhs.lo() > d,
    }
}
