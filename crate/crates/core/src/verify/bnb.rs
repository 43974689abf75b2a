//! Interval branch and bound.
//!
//! The search is a depth-first walk over input boxes, left half first. With
//! `jobs > 1` the next few boxes on the stack are evaluated in parallel ahead
//! of time, but results are committed strictly in depth-first order. Verdict,
//! witness and split count are therefore the same for every `jobs` value,
//! and the reported counterexample is the one on the lexicographically
//! smallest box path.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::interval::{atom_proved, propagate, Interval, IntervalVector};
use super::{probe, Budget, VerifyError};
use crate::network::Network;
use crate::property::{Property, Verdict, Witness};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub splits: usize,
    /// Deepest box examined.
    pub depth: usize,
    /// Boxes examined.
    pub boxes: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOutcome {
    pub verdict: Verdict,
    pub stats: SearchStats,
}

enum NodeEval {
    Proved,
    Violated(Witness),
    Open,
}

struct Node {
    bounds: IntervalVector,
    depth: usize,
    eval: Option<NodeEval>,
}

fn center<S: Scalar>(b: &IntervalVector) -> Vec<Rational> {
    if S::INTEGRAL {
        b.dims()
            .iter()
            .map(|iv| Rational::from_integer(iv.midpoint().floor()))
            .collect()
    } else {
        b.center()
    }
}

fn evaluate<S: Scalar>(net: &Network<S>, prop: &Property, b: &IntervalVector) -> NodeEval {
    let outputs = propagate(net, b).expect("arity checked before search");
    if prop.postcondition.iter().all(|a| atom_proved(a, &outputs)) {
        return NodeEval::Proved;
    }
    match probe(net, prop, &center::<S>(b)) {
        Some(w) => NodeEval::Violated(w),
        None => NodeEval::Open,
    }
}

/// Halves the widest dimension. Integer boxes split into `[lo, m]` and
/// `[m + 1, hi]`, so the halves stay disjoint lattice boxes.
fn split<S: Scalar>(b: &IntervalVector) -> Option<(IntervalVector, IntervalVector)> {
    let i = b.widest()?;
    let iv = &b.dims()[i];
    if iv.is_point() {
        return None;
    }
    let (left_hi, right_lo) = if S::INTEGRAL {
        let m = Rational::from_integer(iv.midpoint().floor());
        let next = &m + &Rational::from(1);
        (m, next)
    } else {
        (iv.midpoint(), iv.midpoint())
    };
    let left = Interval::new(iv.lo().clone(), left_hi).expect("midpoint inside interval");
    let right = Interval::new(right_lo, iv.hi().clone()).expect("midpoint inside interval");
    Some((b.with_dim(i, left), b.with_dim(i, right)))
}

/// Search domain: the property box, shrunk to its integer points for
/// quantised networks. `None` when that leaves nothing.
fn root_box<S: Scalar>(prop: &Property) -> Option<IntervalVector> {
    let dims = prop.precondition.bounds().iter().map(|iv| {
        if S::INTEGRAL {
            let lo = Rational::from_integer(iv.lo().ceil());
            let hi = Rational::from_integer(iv.hi().floor());
            Interval::new(lo, hi).ok()
        } else {
            Some(iv.clone())
        }
    });
    dims.collect::<Option<Vec<_>>>().map(IntervalVector::new)
}

/// Single-threaded branch and bound.
pub fn verify_interval<S: Scalar>(
    net: &Network<S>,
    prop: &Property,
    budget: &Budget,
) -> Result<VerifyOutcome, VerifyError> {
    verify_interval_with(net, prop, budget, 1)
}

/// Branch and bound evaluating up to `jobs` boxes at a time.
pub fn verify_interval_with<S: Scalar>(
    net: &Network<S>,
    prop: &Property,
    budget: &Budget,
    jobs: usize,
) -> Result<VerifyOutcome, VerifyError> {
    prop.check_arity(net.input_arity(), net.output_arity())?;
    let start = Instant::now();
    let mut stats = SearchStats::default();
    let finish = |verdict: Verdict, mut stats: SearchStats| {
        stats.elapsed = start.elapsed();
        Ok(VerifyOutcome { verdict, stats })
    };
    let Some(root) = root_box::<S>(prop) else {
        return finish(Verdict::Holds, stats);
    };
    let jobs = jobs.max(1);
    let pool = if jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| VerifyError::ThreadPool(e.to_string()))?,
        )
    } else {
        None
    };

    let mut stack = vec![Node {
        bounds: root,
        depth: 0,
        eval: None,
    }];
    let mut truncated = false;
    while let Some(top) = stack.last() {
        if start.elapsed() >= budget.wall_clock_limit {
            return finish(Verdict::Timeout, stats);
        }
        if top.eval.is_none() {
            let from = stack.len().saturating_sub(jobs);
            let pending = &mut stack[from..];
            let run = |node: &mut Node| {
                if node.eval.is_none() {
                    node.eval = Some(evaluate(net, prop, &node.bounds));
                }
            };
            match &pool {
                Some(pool) => pool.install(|| pending.par_iter_mut().for_each(run)),
                None => pending.iter_mut().for_each(run),
            }
        }
        let node = stack.pop().expect("stack is nonempty");
        stats.boxes += 1;
        stats.depth = stats.depth.max(node.depth);
        match node.eval.expect("evaluated above") {
            NodeEval::Proved => {}
            NodeEval::Violated(w) => return finish(Verdict::CounterexampleFound(w), stats),
            NodeEval::Open => {
                if node.depth >= budget.max_depth {
                    truncated = true;
                    continue;
                }
                if stats.splits >= budget.max_splits {
                    return finish(Verdict::Timeout, stats);
                }
                match split::<S>(&node.bounds) {
                    Some((left, right)) => {
                        stats.splits += 1;
                        for bounds in [right, left] {
                            stack.push(Node {
                                bounds,
                                depth: node.depth + 1,
                                eval: None,
                            });
                        }
                    }
                    None => truncated = true,
                }
            }
        }
    }
    finish(if truncated { Verdict::Timeout } else { Verdict::Holds }, stats)
}
