//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any failed.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use checknn::fixtures;
use checknn::matrix::{Backend, Matrix};
use checknn::model_io::{kept_positions, load_nnet, prune};
use checknn::network::{argmax, argmax_label, relu, Activation, ClassLabel, Layer, Network};
use checknn::property::{eval_postcondition, Relation, Verdict};
use checknn::scalar::Rational;
use checknn::verify::{
    propagate, replay_witness, verify_exhaustive_quantised, verify_interval, Budget, Interval,
    IntervalVector, DEFAULT_ENUM_CAP,
};
use common::{atom_property, random_box, random_net, random_qnet, rat, reference_forward, sample_point, Weights};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_rows<R: Rng>(g: &mut R, rows: usize, cols: usize) -> Vec<Vec<Rational>> {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if g.gen_bool(0.4) { Rational::zero() } else { rat(g, 12, 5) })
                .collect()
        })
        .collect()
}

fn all_backends(rows: &[Vec<Rational>]) -> Vec<Matrix<Rational>> {
    Backend::ALL
        .iter()
        .map(|&b| Matrix::from_rows(b, rows.to_vec()).unwrap())
        .collect()
}

fn agree(ms: &[Matrix<Rational>]) -> bool {
    let dims = ms[0].dims();
    let rows = ms[0].to_rows();
    ms.iter().all(|m| m.dims() == dims && m.to_rows() == rows)
}

fn backend_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut g = rng(1);
    let mut steps = 0;
    for seq in 0..500 {
        let (r, c) = (g.gen_range(1..=8), g.gen_range(1..=8));
        let mut ms = all_backends(&random_rows(&mut g, r, c));
        for _ in 0..8 {
            let (r, c) = ms[0].dims();
            let op = g.gen_range(0..9);
            let next: Vec<Matrix<Rational>> = match op {
                0 | 1 => {
                    let others = all_backends(&random_rows(&mut g, r, c));
                    ms.iter()
                        .zip(&others)
                        .map(|(m, o)| {
                            if op == 0 {
                                m.map2(o, |a, b| a + b).unwrap()
                            } else {
                                m.map2(o, |a, b| a * b).unwrap()
                            }
                        })
                        .collect()
                }
                2 => ms.iter().map(|m| m.map(relu)).collect(),
                3 => {
                    let k = rat(&mut g, 5, 3);
                    ms.iter()
                        .map(|m| {
                            let k = k.clone();
                            m.map(move |x| &(x * &k) + &Rational::from(1))
                        })
                        .collect()
                }
                4 => ms.iter().map(Matrix::transpose).collect(),
                5 if c < 8 => ms.iter().map(Matrix::add_weight_coeff).collect(),
                6 => {
                    let i = g.gen_range(0..r);
                    ms.iter().map(|m| m.nth_row(i).unwrap()).collect()
                }
                7 => {
                    let others = all_backends(&random_rows(&mut g, r, c));
                    let dots: Vec<Rational> = ms
                        .iter()
                        .zip(&others)
                        .map(|(m, o)| m.dot_product(o).unwrap())
                        .collect();
                    let sums: Vec<Rational> =
                        ms.iter().map(|m| m.fold(Rational::zero(), |a, x| &a + x)).collect();
                    ensure(dots.iter().all(|d| *d == dots[0]), || format!("sequence {seq}: dot products differ"))?;
                    ensure(sums.iter().all(|s| *s == sums[0]), || format!("sequence {seq}: folds differ"))?;
                    ms.clone()
                }
                _ => {
                    let targets = Backend::ALL;
                    let t = targets[g.gen_range(0..3)];
                    ms.iter().map(|m| m.convert(t).convert(m.backend())).collect()
                }
            };
            ms = next;
            steps += 1;
            ensure(agree(&ms), || format!("sequence {seq}: backends disagree after op {op}"))?;
            let (r, c) = ms[0].dims();
            let (i, j) = (g.gen_range(0..r + 1), g.gen_range(0..c + 1));
            let gets: Vec<_> = ms.iter().map(|m| m.get(i, j).ok()).collect();
            let expected = if i < r && j < c {
                vec![gets[0].clone(); 3]
            } else {
                // dense reports the index error, sparse backends read zero
                vec![None, Some(Rational::zero()), Some(Rational::zero())]
            };
            ensure(gets == expected, || format!("sequence {seq}: get({i}, {j}) gave {gets:?}"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("500 sequences, {steps} ops, identical across 3 backends in {elapsed:.2?}"))
}

fn fragment_fixture_fidelity() -> Outcome {
    for b in Backend::ALL {
        let net = fixtures::layer5_layer6(b);
        let l5 = net.layers()[0].weights();
        let l6 = net.layers()[1].weights();
        ensure(l5.dims() == (50, 51), || format!("{b}: layer5 dims {:?}", l5.dims()))?;
        for (j, want) in [(0, 1), (10, -1), (29, -1)] {
            let got = l5.get(0, j).unwrap();
            ensure(got == Rational::from(want), || format!("{b}: layer5 get(0, {j}) = {got}"))?;
        }
        let w = l6.get(0, 10).unwrap();
        ensure(w == Rational::from_ratio(2687, 50000), || format!("{b}: layer6 get(0, 10) = {w}"))?;
    }
    Ok("layer5 (50, 51) with 1, -1, -1; layer6 get(0, 10) = 2687/50000 on all backends".into())
}

fn dense_error_semantics() -> Outcome {
    let mut g = rng(3);
    let shapes: Vec<(usize, usize)> = (1..=3).flat_map(|r| (1..=3).map(move |c| (r, c))).collect();
    let mut mismatched = 0;
    for &(r1, c1) in &shapes {
        for &(r2, c2) in &shapes {
            let a = Matrix::from_rows(Backend::Dense, random_rows(&mut g, r1, c1)).unwrap();
            let b = Matrix::from_rows(Backend::Dense, random_rows(&mut g, r2, c2)).unwrap();
            let map2 = a.map2(&b, |x, y| x + y);
            let dot = a.dot_product(&b);
            if (r1, c1) == (r2, c2) {
                ensure(map2.is_ok() && dot.is_ok(), || format!("{r1}x{c1}: equal shapes rejected"))?;
                continue;
            }
            mismatched += 1;
            for (op, msg) in [
                ("map2", map2.err().map(|e| e.to_string())),
                ("dot_product", dot.err().map(|e| e.to_string())),
            ] {
                let msg = msg.ok_or_else(|| format!("{op} {r1}x{c1} vs {r2}x{c2} returned a result"))?;
                ensure(msg.contains("invalid length"), || format!("{op}: message {msg:?}"))?;
            }
        }
    }
    Ok(format!("{mismatched} mismatched shape pairs rejected by map2 and dot_product"))
}

fn monotone_theorem() -> Outcome {
    let start = Instant::now();
    let mut g = rng(4);
    let mut passed = 0;
    for n in 0..100 {
        let arity = g.gen_range(1..=5);
        let depth = g.gen_range(1..=3);
        let net = random_net(&mut g, Backend::ALL[n % 3], arity, depth, 5, Weights::NonNeg);
        let net = Network::new(
            arity,
            net.layers()
                .iter()
                .map(|l| Layer::new(l.weights().clone(), Activation::Relu).unwrap())
                .collect(),
        )
        .unwrap();
        for _ in 0..10 {
            let x: Vec<Rational> = (0..arity).map(|_| common::nonneg_rat(&mut g, 30, 7)).collect();
            let y: Vec<Rational> = x.iter().map(|v| v + &common::nonneg_rat(&mut g, 10, 7)).collect();
            let (fx, fy) = (net.eval(&x).unwrap(), net.eval(&y).unwrap());
            if fx.iter().zip(&fy).all(|(a, b)| a <= b) {
                passed += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(passed == 1000, || format!("{passed}/1000 ordered pairs monotone"))?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("1000/1000 ordered pairs monotone in {elapsed:.2?}"))
}

fn interval_soundness() -> Outcome {
    let mut g = rng(5);
    let mut samples = 0;
    for n in 0..50 {
        let arity = g.gen_range(1..=4);
        let depth = g.gen_range(1..=3);
        let net = random_net(&mut g, Backend::ALL[n % 3], arity, depth, 5, Weights::Any);
        let bounds = random_box(&mut g, arity);
        let out = propagate(&net, &IntervalVector::new(bounds.clone())).unwrap();
        for _ in 0..1000 {
            let x = sample_point(&mut g, &bounds);
            let y = reference_forward(&net, &x);
            ensure(out.contains_point(&y), || format!("net {n}: output {y:?} at {x:?} escapes bounds"))?;
            samples += 1;
        }
        for _ in 0..5 {
            let x = sample_point(&mut g, &bounds);
            let point = propagate(&net, &IntervalVector::from_point(&x)).unwrap();
            ensure(point == IntervalVector::from_point(&reference_forward(&net, &x)), || {
                format!("net {n}: point box at {x:?} not exact")
            })?;
        }
    }
    Ok(format!("0 violations in {samples} samples; 250 point boxes exact"))
}

fn engine_agreement() -> Outcome {
    let mut g = rng(6);
    let (mut sat, mut unsat, mut timeouts) = (0, 0, 0);
    for n in 0..50 {
        let depth = g.gen_range(1..=3);
        let net = random_qnet(&mut g, 2, depth, 4, 4);
        let bounds: Vec<Interval> = (0..2)
            .map(|_| {
                let lo = g.gen_range(-10..=10);
                Interval::new(Rational::from(lo), Rational::from(lo + g.gen_range(0..=15))).unwrap()
            })
            .collect();
        let relation = [Relation::Le, Relation::Lt, Relation::Ge, Relation::Gt][g.gen_range(0..4)];
        let prop = loop {
            let coefficients = (0..net.output_arity()).map(|k| (k, rat(&mut g, 3, 1))).collect();
            let bound = Rational::from(g.gen_range(-30..=30));
            if let Some(p) = atom_property(bounds.clone(), coefficients, relation, bound) {
                break p;
            }
        };
        let exhaustive = verify_exhaustive_quantised(&net, &prop, &BigInt::from(1), DEFAULT_ENUM_CAP)
            .map_err(|e| format!("net {n}: {e}"))?
            .verdict;
        let interval = verify_interval(&net, &prop, &Budget::default())
            .map_err(|e| format!("net {n}: {e}"))?
            .verdict;
        let contradictory = matches!(
            (&exhaustive, &interval),
            (Verdict::Holds, Verdict::CounterexampleFound(_)) | (Verdict::CounterexampleFound(_), Verdict::Holds)
        );
        ensure(!contradictory, || format!("net {n}: {exhaustive:?} vs {interval:?}"))?;
        for v in [&exhaustive, &interval] {
            if let Some(w) = v.witness() {
                let y = reference_forward(&net, &w.inputs);
                ensure(
                    replay_witness(&net, &prop, w) && !eval_postcondition(&prop, &y).unwrap().holds,
                    || format!("net {n}: witness does not replay"),
                )?;
            }
        }
        match (&exhaustive, &interval) {
            (_, Verdict::Timeout) => timeouts += 1,
            (Verdict::Holds, _) => unsat += 1,
            _ => sat += 1,
        }
    }
    Ok(format!("no contradictions: {sat} SAT, {unsat} UNSAT, {timeouts} interval timeouts"))
}

fn acas_scale_smoke() -> Outcome {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/acas_layout.nnet");
    let model = load_nnet(path, Backend::Record).map_err(|e| e.to_string())?;
    ensure(model.layer_sizes == [5, 50, 50, 50, 50, 50, 50, 5], || {
        format!("layer sizes {:?}", model.layer_sizes)
    })?;
    let net = &model.network;
    for (k, layer) in net.layers().iter().enumerate().skip(1).take(5) {
        ensure(layer.weights().dims() == (50, 51), || format!("layer {k} dims {:?}", layer.weights().dims()))?;
    }
    let x: Vec<Rational> = ["0.1", "-0.2", "0.05", "0.3", "-0.1"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let start = Instant::now();
    let y = net.eval(&x).map_err(|e| e.to_string())?;
    let forward = start.elapsed();
    ensure(forward < Duration::from_secs(10), || format!("forward pass took {forward:?}"))?;
    ensure(y.len() == 5, || "expected 5 outputs".into())?;

    let pruned = prune(net, &Rational::from_ratio(9, 10)).map_err(|e| e.to_string())?;
    let total = net.non_bias_weights().len();
    let kept = kept_positions(&pruned).len();
    ensure(kept.abs_diff(total / 10) <= 1, || format!("kept {kept} of {total}"))?;

    let prop = fixtures::property(fixtures::ACAS_SAMPLE_PROPERTY);
    let budget = Budget {
        max_splits: 2000,
        wall_clock_limit: Duration::from_secs(300),
        ..Budget::default()
    };
    let start = Instant::now();
    let outcome = verify_interval(&pruned, &prop, &budget).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(elapsed <= Duration::from_secs(300), || format!("verification took {elapsed:?}"))?;
    if let Some(w) = outcome.verdict.witness() {
        ensure(replay_witness(&pruned, &prop, w), || "witness does not replay".into())?;
    }
    Ok(format!(
        "forward {forward:.2?}; pruned to {kept}/{total} weights; verify {} after {} splits in {elapsed:.2?}",
        outcome.verdict.sat_label(),
        outcome.stats.splits
    ))
}

fn pruning_arithmetic() -> Outcome {
    let r = Rational::from_ratio;
    let layers = vec![
        Layer::new(
            Matrix::from_rows(
                Backend::Dense,
                vec![vec![r(1, 2), r(1, 1), r(-2, 1), r(3, 1)], vec![r(-1, 3), r(-4, 1), r(5, 1), r(-6, 1)]],
            )
            .unwrap(),
            Activation::Relu,
        )
        .unwrap(),
        Layer::new(
            Matrix::from_rows(Backend::Dense, vec![vec![r(7, 1), r(7, 10), r(-8, 10)], vec![r(0, 1), r(9, 10), r(1, 10)]])
                .unwrap(),
            Activation::Identity,
        )
        .unwrap(),
    ];
    let toy = Network::new(3, layers).unwrap();
    ensure(toy.non_bias_weights().len() == 10, || "toy net must have 10 non-bias weights".into())?;
    for b in Backend::ALL {
        let net = toy.to_backend(b);
        let at = |tenths: i64| kept_positions(&prune(&net, &r(tenths, 10)).unwrap());
        let kept = at(9);
        ensure(kept.len() == 1, || format!("{b}: fraction 0.9 kept {kept:?}"))?;
        let identity = prune(&net, &Rational::zero()).unwrap();
        ensure(
            identity.layers().iter().zip(net.layers()).all(|(x, y)| x.weights().same_elements(y.weights())),
            || format!("{b}: fraction 0 changed the network"),
        )?;
        let sets: Vec<BTreeSet<_>> = (0..10).map(at).collect();
        ensure(sets.windows(2).all(|w| w[1].is_subset(&w[0])), || format!("{b}: kept sets do not nest"))?;
    }
    Ok("0.9 keeps 1 of 10; 0 is identity; kept sets nest over 0.0..0.9 on all backends".into())
}

fn iris_pipeline() -> Outcome {
    let labels = fixtures::iris_labels();
    let mut seen = Vec::new();
    for b in Backend::ALL {
        let net = fixtures::iris(b);
        for (x, expected) in fixtures::iris_samples() {
            let y = net.forward(&Matrix::row_vector(b, x)).map_err(|e| e.to_string())?;
            let label = argmax_label(&y, &labels).map_err(|e| e.to_string())?;
            ensure(label.name == expected, || format!("{b}: got {} expected {expected}", label.name))?;
            if b == Backend::Dense {
                seen.push(label.name.clone());
            }
        }
    }
    let tie = Matrix::row_vector(Backend::Lazy, vec![Rational::from(1), Rational::from(1), Rational::from(0)]);
    let three = ClassLabel::from_names(&["setosa", "versicolor", "virginica"]);
    let label = argmax_label(&tie, &three).map_err(|e| e.to_string())?;
    ensure(label.index == 0, || format!("tie resolved to {}", label.name))?;
    ensure(
        argmax(&[Rational::from(2), Rational::from(5), Rational::from(5)]) == Some(1),
        || "tie between 1 and 2 must pick 1".into(),
    )?;
    Ok(format!("samples -> {}; tie (1, 1, 0) -> setosa", seen.join(", ")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("backend oracle equivalence", backend_oracle_equivalence),
        ("fragment fixture fidelity", fragment_fixture_fidelity),
        ("dense error semantics", dense_error_semantics),
        ("monotone network theorem", monotone_theorem),
        ("interval soundness", interval_soundness),
        ("engine agreement", engine_agreement),
        ("ACAS-scale smoke test", acas_scale_smoke),
        ("pruning arithmetic", pruning_arithmetic),
        ("Iris pipeline", iris_pipeline),
    ];
    let mut failures = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", n + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{}] {name}: {detail}", n + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
