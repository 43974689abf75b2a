//! Complete enumeration of an integer grid for quantised networks.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{probe, VerifyError};
use crate::network::Network;
use crate::property::{Property, Verdict};
use crate::scalar::{QuantInt, Rational};

/// Default bound on grid points, overridable by callers.
pub const DEFAULT_ENUM_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExhaustiveOutcome {
    pub verdict: Verdict,
    pub evaluations: u64,
    pub elapsed: Duration,
}

/// Grid coordinates along one axis: `lo, lo + step, ...` up to `hi`, with
/// `hi` appended when the step overshoots it.
pub fn grid_axis(lo: &BigInt, hi: &BigInt, step: &BigInt) -> Vec<BigInt> {
    let mut axis = Vec::new();
    let mut x = lo.clone();
    while &x <= hi {
        axis.push(x.clone());
        x += step;
    }
    if axis.last() != Some(hi) {
        axis.push(hi.clone());
    }
    axis
}

fn axis_len(lo: &BigInt, hi: &BigInt, step: &BigInt) -> BigInt {
    let (q, rem) = (hi - lo).div_rem(step);
    q + BigInt::one() + if rem.is_zero() { BigInt::zero() } else { BigInt::one() }
}

fn integral_bounds(prop: &Property) -> Result<Vec<(BigInt, BigInt)>, VerifyError> {
    prop.precondition
        .bounds()
        .iter()
        .enumerate()
        .map(|(input, iv)| {
            for bound in [iv.lo(), iv.hi()] {
                if !bound.is_integer() {
                    return Err(VerifyError::NonIntegralBound {
                        input,
                        bound: bound.clone(),
                    });
                }
            }
            Ok((iv.lo().numer().clone(), iv.hi().numer().clone()))
        })
        .collect()
}

/// Number of grid points `verify_exhaustive_quantised` would evaluate.
pub fn grid_size(prop: &Property, grid_step: &BigInt) -> Result<BigInt, VerifyError> {
    if grid_step <= &BigInt::zero() {
        return Err(VerifyError::GridStep);
    }
    Ok(integral_bounds(prop)?
        .iter()
        .map(|(lo, hi)| axis_len(lo, hi, grid_step))
        .product())
}

/// Evaluates every grid point in lexicographic order, stopping at the first
/// counterexample. Refuses grids larger than `cap` instead of sampling.
pub fn verify_exhaustive_quantised(
    net: &Network<QuantInt>,
    prop: &Property,
    grid_step: &BigInt,
    cap: u64,
) -> Result<ExhaustiveOutcome, VerifyError> {
    prop.check_arity(net.input_arity(), net.output_arity())?;
    let points = grid_size(prop, grid_step)?;
    if points > BigInt::from(cap) {
        return Err(VerifyError::CapExceeded { points, cap });
    }
    let start = Instant::now();
    let axes: Vec<Vec<Rational>> = integral_bounds(prop)?
        .iter()
        .map(|(lo, hi)| {
            grid_axis(lo, hi, grid_step)
                .into_iter()
                .map(Rational::from_integer)
                .collect()
        })
        .collect();
    let mut index = vec![0usize; axes.len()];
    let mut evaluations = 0u64;
    loop {
        let point: Vec<Rational> = index.iter().zip(&axes).map(|(&i, a)| a[i].clone()).collect();
        evaluations += 1;
        if let Some(w) = probe(net, prop, &point) {
            return Ok(ExhaustiveOutcome {
                verdict: Verdict::CounterexampleFound(w),
                evaluations,
                elapsed: start.elapsed(),
            });
        }
        // odometer, last axis fastest
        let mut k = axes.len();
        loop {
            if k == 0 {
                return Ok(ExhaustiveOutcome {
                    verdict: Verdict::Holds,
                    evaluations,
                    elapsed: start.elapsed(),
                });
            }
            k -= 1;
            index[k] += 1;
            if index[k] < axes[k].len() {
                break;
            }
            index[k] = 0;
        }
    }
}
