//! Benchmark harness: times forward passes and verification runs for each
//! backend and engine and writes one CSV row per combination.
//!
//! Timings are floating-point milliseconds; everything else in a row is
//! exact and deterministic, so rows from two runs differ only in timings.

use std::time::{Duration, Instant};

use checknn::matrix::Backend;
use checknn::model_io::Model;
use checknn::property::{Property, Verdict};
use checknn::scalar::{count_ops, OpCounts, Rational};
use checknn::verify::Engine;
use sha2::{Digest, Sha256};

use crate::commands::{eval_model, load, load_property, parse_vector, run_engine, RunOutcome};
use crate::{BenchArgs, CliError};

pub const HEADER: [&str; 12] = [
    "backend",
    "engine",
    "op",
    "repetitions",
    "median_ms",
    "min_ms",
    "max_ms",
    "splits",
    "verdict",
    "output_hash",
    "adds",
    "muls",
];

struct Row {
    backend: Backend,
    engine: Option<Engine>,
    op: &'static str,
    times: Vec<Duration>,
    splits: usize,
    verdict: String,
    hash: String,
    ops: OpCounts,
}

impl Row {
    fn record(&self) -> Vec<String> {
        let mut ms: Vec<f64> = self.times.iter().map(|t| t.as_secs_f64() * 1e3).collect();
        ms.sort_by(f64::total_cmp);
        let n = ms.len();
        let median = if n % 2 == 1 {
            ms[n / 2]
        } else {
            (ms[n / 2 - 1] + ms[n / 2]) / 2.0
        };
        vec![
            self.backend.name().to_string(),
            self.engine.map_or("none", Engine::name).to_string(),
            self.op.to_string(),
            n.to_string(),
            format!("{median:.3}"),
            format!("{:.3}", ms[0]),
            format!("{:.3}", ms[n - 1]),
            self.splits.to_string(),
            self.verdict.clone(),
            self.hash.clone(),
            self.ops.adds.to_string(),
            self.ops.muls.to_string(),
        ]
    }
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Hash of exact outputs, so backends can be compared without printing them.
pub fn output_hash(values: &[Rational]) -> String {
    let text = values.iter().map(Rational::to_string).collect::<Vec<_>>().join(",");
    sha256_hex(&text)
}

fn verdict_hash(verdict: &Verdict) -> String {
    match verdict.witness() {
        Some(w) => sha256_hex(&format!(
            "{}|{}|{}",
            verdict.sat_label(),
            w.inputs.iter().map(Rational::to_string).collect::<Vec<_>>().join(","),
            w.outputs.iter().map(Rational::to_string).collect::<Vec<_>>().join(",")
        )),
        None => sha256_hex(verdict.sat_label()),
    }
}

fn parse_list<T: std::str::FromStr<Err = String>>(text: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|t| t.trim().parse().map_err(CliError::Usage))
        .collect()
}

/// Forward input: explicit, else the property box center (floored for
/// quantised models), else all ones.
fn forward_input(
    args: &BenchArgs,
    model: &Model,
    prop: Option<&Property>,
) -> Result<Vec<Rational>, CliError> {
    if let Some(text) = &args.input {
        return parse_vector(text);
    }
    Ok(match prop {
        Some(p) => p
            .precondition
            .bounds()
            .iter()
            .map(|iv| {
                let m = iv.midpoint();
                if model.is_quantised() {
                    Rational::from_integer(m.floor())
                } else {
                    m
                }
            })
            .collect(),
        None => vec![Rational::from(1); model.input_arity()],
    })
}

pub fn run(args: &BenchArgs) -> Result<u8, CliError> {
    if args.repetitions == 0 {
        return Err(CliError::Usage("--repetitions must be at least 1".into()));
    }
    if args.run.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let backends: Vec<Backend> = parse_list(&args.backends)?;
    let engines: Vec<Engine> = parse_list(&args.engines)?;
    let loaded = load(&args.model)?;
    let prop = args.property.as_deref().map(load_property).transpose()?;
    let input = forward_input(args, &loaded.model, prop.as_ref())?;

    let mut rows = Vec::new();
    for &backend in &backends {
        let model = loaded.model.to_backend(backend);
        let (first, ops) = count_ops(|| eval_model(&model, &input));
        let outputs = first?;
        let mut times = Vec::with_capacity(args.repetitions);
        for _ in 0..args.repetitions {
            let start = Instant::now();
            eval_model(&model, &input)?;
            times.push(start.elapsed());
        }
        rows.push(Row {
            backend,
            engine: None,
            op: "forward",
            times,
            splits: 0,
            verdict: String::new(),
            hash: output_hash(&outputs),
            ops,
        });
        let Some(prop) = &prop else { continue };
        for &engine in &engines {
            let mut times = Vec::with_capacity(args.repetitions);
            let mut last: Option<(RunOutcome, OpCounts)> = None;
            for _ in 0..args.repetitions {
                let (outcome, ops) = count_ops(|| run_engine(&model, prop, engine, &args.run));
                let outcome = outcome?;
                times.push(outcome.elapsed);
                last = Some((outcome, ops));
            }
            let (outcome, ops) = last.expect("at least one repetition");
            rows.push(Row {
                backend,
                engine: Some(engine),
                op: "verify",
                times,
                splits: outcome.splits,
                verdict: outcome.verdict.sat_label().to_string(),
                hash: verdict_hash(&outcome.verdict),
                ops,
            });
        }
    }

    let sink: Box<dyn std::io::Write> = match &args.output {
        Some(path) => Box::new(
            std::fs::File::create(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
        ),
        None => Box::new(std::io::stdout()),
    };
    let mut out = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| CliError::Data(e.to_string());
    out.write_record(HEADER).map_err(io)?;
    for row in &rows {
        out.write_record(row.record()).map_err(io)?;
    }
    out.flush().map_err(|e| CliError::Data(e.to_string()))?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_sha256_of_exact_rendering() {
        // sha256("1/3,2")
        let v = [Rational::from_ratio(1, 3), Rational::from(2)];
        assert_eq!(output_hash(&v), sha256_hex("1/3,2"));
        assert_eq!(
            sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn median_of_even_count_averages() {
        let row = Row {
            backend: Backend::Dense,
            engine: None,
            op: "forward",
            times: [4, 1, 3, 2].map(Duration::from_millis).to_vec(),
            splits: 0,
            verdict: String::new(),
            hash: String::new(),
            ops: OpCounts::default(),
        };
        let rec = row.record();
        assert_eq!(&rec[3..7], ["4", "2.500", "1.000", "4.000"]);
        assert_eq!(rec[1], "none");
    }
}
