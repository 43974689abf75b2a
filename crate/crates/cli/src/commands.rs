//! Subcommand implementations. Each returns the process exit code on
//! success; errors carry their own code through [`CliError`].

use std::path::Path;
use std::time::{Duration, Instant};

use checknn::matrix::Backend;
use checknn::model_io::{load_model, prune as prune_network, quantize as quantize_network};
use checknn::model_io::{save_json, LoadedModel, Model, ModelError, NNetModel};
use checknn::network::{argmax, Network};
use checknn::property::{Property, PropertyError, Verdict};
use checknn::scalar::{QuantInt, Rational, Scalar};
use checknn::verify::{
    falsify_random, verify_exhaustive_quantised, verify_interval_with, Budget, Engine,
    VerifyError, VerifyReport, DEFAULT_ENUM_CAP,
};
use num_bigint::BigInt;

use crate::{CliError, ConvertArgs, InferArgs, ModelArgs, PruneArgs, QuantizeArgs, RenderArgs};
use crate::{RunConfig, VerifyArgs};

pub const EXIT_HOLDS: u8 = 0;
pub const EXIT_COUNTEREXAMPLE: u8 = 1;
pub const EXIT_UNDECIDED: u8 = 2;

pub const ENUM_CAP_VAR: &str = "CHECKNN_ENUM_CAP";

/// Exit code as a function of the verdict alone.
pub fn verdict_exit_code(verdict: &Verdict) -> u8 {
    match verdict {
        Verdict::Holds => EXIT_HOLDS,
        Verdict::CounterexampleFound(_) => EXIT_COUNTEREXAMPLE,
        Verdict::Timeout | Verdict::Unknown(_) => EXIT_UNDECIDED,
    }
}

fn model_error(path: &Path, e: ModelError) -> CliError {
    match e {
        ModelError::Arity { .. } | ModelError::Fraction(_) | ModelError::Scale => {
            CliError::Usage(e.to_string())
        }
        _ => CliError::Data(format!("{}: {e}", path.display())),
    }
}

pub fn load(args: &ModelArgs) -> Result<LoadedModel, CliError> {
    load_model(&args.model, args.backend).map_err(|e| model_error(&args.model, e))
}

pub fn load_property(path: &Path) -> Result<Property, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Property::parse(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Parses `1.5, -2, 1/3` into exact rationals.
pub fn parse_vector(text: &str) -> Result<Vec<Rational>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<Rational>()
                .map_err(|e| CliError::Usage(format!("bad input value {:?}: {e}", t.trim())))
        })
        .collect()
}

pub fn render(x: &Rational, args: &RenderArgs) -> String {
    if args.exact {
        x.to_string()
    } else {
        x.to_sig_string(args.precision)
    }
}

fn check_input_arity(expected: usize, got: usize) -> Result<(), CliError> {
    if expected != got {
        return Err(CliError::Usage(format!(
            "model expects {expected} inputs, got {got}"
        )));
    }
    Ok(())
}

/// Evaluates either kind of model on rational inputs. Quantised models only
/// accept integers.
pub fn eval_model(model: &Model, input: &[Rational]) -> Result<Vec<Rational>, CliError> {
    fn run<S: Scalar>(net: &Network<S>, input: &[Rational]) -> Result<Vec<Rational>, CliError> {
        let x: Vec<S> = input
            .iter()
            .map(|v| {
                S::from_rational(v).ok_or_else(|| {
                    CliError::Usage(format!("quantised models take integer inputs, got {v}"))
                })
            })
            .collect::<Result<_, _>>()?;
        let y = net.eval(&x).map_err(|e| CliError::Data(e.to_string()))?;
        Ok(y.iter().map(S::to_rational).collect())
    }
    check_input_arity(model.input_arity(), input.len())?;
    match model {
        Model::Rational(net) => run(net, input),
        Model::Quantised { network, .. } => run(network, input),
    }
}

fn read_labels(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

pub fn infer(args: &InferArgs) -> Result<u8, CliError> {
    let loaded = load(&args.model)?;
    let mut input = parse_vector(&args.input)?;
    check_input_arity(loaded.model.input_arity(), input.len())?;
    if args.normalize {
        let norm = loaded.normalization.as_ref().ok_or_else(|| {
            CliError::Usage("--normalize needs a model with normalisation metadata".into())
        })?;
        input = norm.normalize_input(&input).map_err(|e| model_error(&args.model.model, e))?;
    }
    let labels = args.labels.as_deref().map(read_labels).transpose()?;
    if let Some(labels) = &labels {
        if labels.len() != loaded.model.output_arity() {
            return Err(CliError::Data(format!(
                "{} labels for {} outputs",
                labels.len(),
                loaded.model.output_arity()
            )));
        }
    }
    let outputs = eval_model(&loaded.model, &input)?;
    for (i, y) in outputs.iter().enumerate() {
        println!("y{i} = {}", render(y, &args.render));
    }
    if let (Some(labels), Some(best)) = (&labels, argmax(&outputs)) {
        println!("label = {}", labels[best]);
    }
    Ok(0)
}

fn verify_error(e: VerifyError) -> CliError {
    match e {
        VerifyError::Network(_) | VerifyError::ThreadPool(_) => CliError::Data(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    }
}

/// Exhaustive enumeration cap: `CHECKNN_ENUM_CAP` when set, else the default.
pub fn enum_cap() -> Result<u64, CliError> {
    match std::env::var(ENUM_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{ENUM_CAP_VAR} must be a nonnegative integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_ENUM_CAP),
    }
}

/// A finished verification run.
pub struct RunOutcome {
    pub verdict: Verdict,
    pub splits: usize,
    pub depth: usize,
    pub elapsed: Duration,
}

/// Runs one engine on a loaded model. Exhaustive enumeration needs a
/// quantised model.
pub fn run_engine(
    model: &Model,
    prop: &Property,
    engine: Engine,
    run: &RunConfig,
) -> Result<RunOutcome, CliError> {
    prop.check_arity(model.input_arity(), model.output_arity())
        .map_err(|e: PropertyError| CliError::Usage(e.to_string()))?;
    let budget = Budget {
        max_splits: run.max_splits,
        max_depth: run.max_depth,
        wall_clock_limit: Duration::from_secs(run.timeout_secs),
    };
    match engine {
        Engine::Interval => {
            let outcome = match model {
                Model::Rational(net) => verify_interval_with(net, prop, &budget, run.jobs),
                Model::Quantised { network, .. } => {
                    verify_interval_with(network, prop, &budget, run.jobs)
                }
            }
            .map_err(verify_error)?;
            Ok(RunOutcome {
                verdict: outcome.verdict,
                splits: outcome.stats.splits,
                depth: outcome.stats.depth,
                elapsed: outcome.stats.elapsed,
            })
        }
        Engine::Exhaustive => {
            let Model::Quantised { network, .. } = model else {
                return Err(CliError::Usage(
                    "the exhaustive engine needs a quantised model".into(),
                ));
            };
            let step = BigInt::from(run.grid_step);
            let outcome = verify_exhaustive_quantised(network, prop, &step, enum_cap()?)
                .map_err(verify_error)?;
            Ok(RunOutcome {
                verdict: outcome.verdict,
                splits: 0,
                depth: 0,
                elapsed: outcome.elapsed,
            })
        }
        Engine::Random => {
            let start = Instant::now();
            let verdict = match model {
                Model::Rational(net) => falsify_random(net, prop, run.samples, run.seed),
                Model::Quantised { network, .. } => {
                    falsify_random(network, prop, run.samples, run.seed)
                }
            }
            .map_err(verify_error)?;
            Ok(RunOutcome {
                verdict,
                splits: 0,
                depth: 0,
                elapsed: start.elapsed(),
            })
        }
    }
}

pub fn verify(args: &VerifyArgs) -> Result<u8, CliError> {
    let loaded = load(&args.model)?;
    let prop = load_property(&args.property)?;
    if args.run.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let outcome = run_engine(&loaded.model, &prop, args.engine, &args.run)?;
    let report = VerifyReport::new(
        &prop,
        &outcome.verdict,
        args.engine,
        outcome.splits,
        outcome.depth,
        outcome.elapsed,
    );
    let mut json = report.to_json();
    json.push('\n');
    match &args.report {
        Some(path) => {
            write_file(path, &json)?;
            println!("{} {}", report.result, prop.name);
        }
        None => print!("{json}"),
    }
    Ok(verdict_exit_code(&outcome.verdict))
}

pub fn prune(args: &PruneArgs) -> Result<u8, CliError> {
    let fraction: Rational = args
        .fraction
        .parse()
        .map_err(|e| CliError::Usage(format!("bad fraction {:?}: {e}", args.fraction)))?;
    let loaded = load(&args.model)?;
    let pruned = match &loaded.model {
        Model::Rational(net) => prune_network(net, &fraction).map(Model::Rational),
        Model::Quantised { network, scale } => {
            prune_network(network, &fraction).map(|network| Model::Quantised {
                network,
                scale: scale.clone(),
            })
        }
    }
    .map_err(|e| model_error(&args.model.model, e))?;
    write_file(&args.output, &save_json(&pruned))?;
    Ok(0)
}

pub fn quantize(args: &QuantizeArgs) -> Result<u8, CliError> {
    let scale: QuantInt = args
        .scale
        .parse()
        .map_err(|e| CliError::Usage(format!("bad scale {:?}: {e}", args.scale)))?;
    let loaded = load(&args.model)?;
    let Model::Rational(net) = &loaded.model else {
        return Err(CliError::Usage("model is already quantised".into()));
    };
    let network =
        quantize_network(net, scale.value()).map_err(|e| model_error(&args.model.model, e))?;
    let model = Model::Quantised {
        network,
        scale: Some(scale.value().clone()),
    };
    write_file(&args.output, &save_json(&model))?;
    Ok(0)
}

pub fn convert(args: &ConvertArgs) -> Result<u8, CliError> {
    let loaded = load(&args.model)?;
    let to_nnet = args
        .output
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("nnet"));
    let text = if to_nnet {
        let (Model::Rational(net), Some(norm)) = (&loaded.model, &loaded.normalization) else {
            return Err(CliError::Usage(
                "NNet output needs a rational model with normalisation metadata".into(),
            ));
        };
        let mut layer_sizes = vec![net.input_arity()];
        layer_sizes.extend(net.layers().iter().map(|l| l.n_nodes()));
        NNetModel {
            layer_sizes,
            normalization: norm.clone(),
            network: net.to_backend(Backend::Dense),
        }
        .to_text()
    } else {
        save_json(&loaded.model)
    };
    write_file(&args.output, &text)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_verdict() {
        assert_eq!(verdict_exit_code(&Verdict::Holds), 0);
        assert_eq!(verdict_exit_code(&Verdict::Timeout), 2);
        assert_eq!(verdict_exit_code(&Verdict::Unknown("x".into())), 2);
    }

    #[test]
    fn vectors_parse_exactly() {
        let v = parse_vector("0.1, -2 ,1/3").unwrap();
        assert_eq!(v, vec![Rational::from_ratio(1, 10), Rational::from(-2), Rational::from_ratio(1, 3)]);
        assert!(matches!(parse_vector("1,,2"), Err(CliError::Usage(_))));
    }

    #[test]
    fn rendering_respects_flags() {
        let third = Rational::from_ratio(1, 3);
        let exact = RenderArgs { exact: true, precision: 6 };
        let rounded = RenderArgs { exact: false, precision: 3 };
        assert_eq!(render(&third, &exact), "1/3");
        assert_eq!(render(&third, &rounded), "0.333");
    }
}
