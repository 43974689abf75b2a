//! Verification engines: interval branch and bound, exhaustive grid
//! enumeration for quantised networks, seeded random falsification and a
//! monotonicity check.
//!
//! For quantised networks the input domain is the integer lattice inside the
//! property box, and the postcondition reads the raw integer outputs.

mod bnb;
mod exhaustive;
mod interval;
mod sampling;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

pub use bnb::{verify_interval, verify_interval_with, SearchStats, VerifyOutcome};
pub use exhaustive::{
    grid_axis, grid_size, verify_exhaustive_quantised, ExhaustiveOutcome, DEFAULT_ENUM_CAP,
};
pub use interval::{
    atom_bounds, atom_proved, interval_affine, propagate, Interval, IntervalVector,
};
pub use sampling::{
    check_monotone, dyadic_point, falsify_random, MonotoneReport, MonotoneTest, DYADIC_DEPTH,
};

use crate::network::{Network, NetworkError};
use crate::property::{eval_postcondition, Property, PropertyError, Verdict, Witness};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Property(#[from] PropertyError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("input {input} has non-integral bound {bound}")]
    NonIntegralBound { input: usize, bound: Rational },
    #[error("grid step must be positive")]
    GridStep,
    #[error("grid has {points} points, above the enumeration cap of {cap}")]
    CapExceeded { points: BigInt, cap: u64 },
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Search limits for branch and bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budget {
    pub max_splits: usize,
    pub wall_clock_limit: Duration,
    pub max_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_splits: 10_000,
            wall_clock_limit: Duration::from_secs(300),
            max_depth: 1_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Interval,
    Exhaustive,
    Random,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::Interval, Engine::Exhaustive, Engine::Random];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Interval => "interval",
            Engine::Exhaustive => "exhaustive",
            Engine::Random => "random",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown engine {s:?} (expected interval, exhaustive or random)"))
    }
}

/// Evaluates the network at a rational point and returns a witness if the
/// postcondition fails there. `None` also when the point is not in the
/// network's domain (a non-integer point for a quantised network).
pub fn probe<S: Scalar>(net: &Network<S>, prop: &Property, point: &[Rational]) -> Option<Witness> {
    let input: Vec<S> = point.iter().map(S::from_rational).collect::<Option<_>>()?;
    let outputs: Vec<Rational> = net.eval(&input).ok()?.iter().map(S::to_rational).collect();
    let eval = eval_postcondition(prop, &outputs).ok()?;
    (!eval.holds).then(|| Witness {
        inputs: point.to_vec(),
        outputs,
        violated: eval.violated,
    })
}

/// Re-runs a witness: inside the box, same outputs, same violated atoms,
/// at least one of them.
pub fn replay_witness<S: Scalar>(net: &Network<S>, prop: &Property, witness: &Witness) -> bool {
    prop.precondition.contains(&witness.inputs)
        && probe(net, prop, &witness.inputs).is_some_and(|w| w == *witness)
}

/// Machine-readable verification report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub property: String,
    pub verdict: String,
    /// SAT when a counterexample exists, UNSAT when the property holds.
    pub result: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub splits: usize,
    pub depth: usize,
    pub elapsed_ms: u64,
    pub engine: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub violated: Vec<String>,
}

impl VerifyReport {
    pub fn new(
        prop: &Property,
        verdict: &Verdict,
        engine: Engine,
        splits: usize,
        depth: usize,
        elapsed: Duration,
    ) -> Self {
        let exact = |xs: &[Rational]| xs.iter().map(|x| x.to_string()).collect();
        VerifyReport {
            property: prop.name.clone(),
            verdict: verdict.name().to_string(),
            result: verdict.sat_label().to_string(),
            witness: verdict.witness().map(|w| WitnessReport {
                inputs: exact(&w.inputs),
                outputs: exact(&w.outputs),
                violated: w
                    .violated
                    .iter()
                    .map(|&i| prop.postcondition[i].to_string())
                    .collect(),
            }),
            reason: match verdict {
                Verdict::Unknown(reason) => Some(reason.clone()),
                _ => None,
            },
            splits,
            depth,
            elapsed_ms: u64::try_from(elapsed.as_millis()).unwrap_or(u64::MAX),
            engine: engine.name().to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialise")
    }
}
