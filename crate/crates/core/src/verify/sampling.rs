//! Seeded random falsification and the monotonicity check.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::interval::Interval;
use super::{probe, VerifyError};
use crate::network::Network;
use crate::property::{Property, Verdict};
use crate::scalar::{Rational, Scalar};

/// Refinement depth of the dyadic sampling grid.
pub const DYADIC_DEPTH: u32 = 20;

/// Point `lo + (2k + 1) / 2^(d+1) * (hi - lo)` for uniform `k < 2^d`: the
/// midpoint of a random cell of the depth-`d` dyadic refinement. For
/// integral kinds the cell picks one of the integers in the interval.
pub fn dyadic_point<S: Scalar, R: Rng>(rng: &mut R, iv: &Interval) -> Option<Rational> {
    let k: u64 = rng.gen_range(0..1u64 << DYADIC_DEPTH);
    let t = Rational::new(BigInt::from(2 * k + 1), BigInt::from(1u64 << (DYADIC_DEPTH + 1)))
        .expect("nonzero denominator");
    if S::INTEGRAL {
        let lo = iv.lo().ceil();
        let hi = iv.hi().floor();
        if lo > hi {
            return None;
        }
        let count = Rational::from_integer(&hi - &lo + 1);
        Some(Rational::from_integer(lo + (&t * &count).floor()))
    } else {
        Some(iv.lo() + &(&t * &iv.width()))
    }
}

/// Tries `samples` seeded points; never claims the property holds.
pub fn falsify_random<S: Scalar>(
    net: &Network<S>,
    prop: &Property,
    samples: usize,
    seed: u64,
) -> Result<Verdict, VerifyError> {
    if samples == 0 {
        return Err(VerifyError::NoSamples);
    }
    prop.check_arity(net.input_arity(), net.output_arity())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let point: Option<Vec<Rational>> = prop
            .precondition
            .bounds()
            .iter()
            .map(|iv| dyadic_point::<S, _>(&mut rng, iv))
            .collect();
        let Some(point) = point else {
            return Ok(Verdict::Unknown("the box contains no integer point".into()));
        };
        if let Some(w) = probe(net, prop, &point) {
            return Ok(Verdict::CounterexampleFound(w));
        }
    }
    Ok(Verdict::Unknown(format!("no counterexample in {samples} samples")))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonotoneTest<S> {
    Pass { pairs: usize },
    /// `x <= y` componentwise but `forward(x) <= forward(y)` fails.
    Fail {
        x: Vec<S>,
        y: Vec<S>,
        fx: Vec<S>,
        fy: Vec<S>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneReport<S> {
    /// Every non-bias weight is nonnegative.
    pub structural: bool,
    pub tested: MonotoneTest<S>,
}

fn random_nonneg<S: Scalar, R: Rng>(rng: &mut R) -> S {
    let numer: i64 = rng.gen_range(0..=64);
    let denom: i64 = if S::INTEGRAL { 1 } else { rng.gen_range(1..=8) };
    S::from_rational(&Rational::from_ratio(numer, denom)).expect("integral when S is integral")
}

/// Structural check plus `pairs` seeded random ordered nonnegative input
/// pairs. Biases do not affect monotonicity and are not inspected.
pub fn check_monotone<S: Scalar>(net: &Network<S>, pairs: usize, seed: u64) -> MonotoneReport<S> {
    let structural = net
        .non_bias_weights()
        .iter()
        .all(|(_, _, _, w)| *w >= S::zero());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = net.input_arity();
    for _ in 0..pairs {
        let x: Vec<S> = (0..n).map(|_| random_nonneg(&mut rng)).collect();
        let y: Vec<S> = x
            .iter()
            .map(|xi| xi.clone() + random_nonneg(&mut rng))
            .collect();
        let fx = net.eval(&x).expect("arity matches by construction");
        let fy = net.eval(&y).expect("arity matches by construction");
        if fx.iter().zip(&fy).any(|(a, b)| a > b) {
            return MonotoneReport {
                structural,
                tested: MonotoneTest::Fail { x, y, fx, fy },
            };
        }
    }
    MonotoneReport {
        structural,
        tested: MonotoneTest::Pass { pairs },
    }
}
