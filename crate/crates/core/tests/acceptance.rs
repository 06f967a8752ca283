//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any hard criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use nnpda::controller::{reading_derivative, reading_vector};
use nnpda::extraction::machines::{palindrome_pda, paren_pda};
use nnpda::grammars::{anbn_fixture, DatasetSpec};
use nnpda::training::{augment_with_errors, evaluate, frozen_reading_run, init_weights};
use nnpda::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------------------
// stack replay

struct Table {
    name: &'static str,
    alphabet: &'static [&'static str],
    /// (input, action, expected segment lengths bottom first)
    rows: &'static [(&'static str, f64, &'static [f64])],
    final_length: f64,
}

const TABLES: [Table; 4] = [
    Table {
        name: "acabc",
        alphabet: &["a", "b", "c"],
        rows: &[
            ("a", 1.0, &[1.0]),
            ("c", 0.1323, &[1.0, 0.1323]),
            ("a", -0.9869, &[0.1454]),
            ("b", 0.7667, &[0.1454, 0.7667]),
            ("c", 0.9684, &[0.1454, 0.7667, 0.9684]),
        ],
        final_length: 1.8805,
    },
    Table {
        name: "bacab",
        alphabet: &["a", "b", "c"],
        rows: &[
            ("b", 1.0, &[1.0]),
            ("a", 0.9540, &[1.0, 0.9540]),
            ("c", 0.0625, &[1.0, 0.9540, 0.0625]),
            ("a", -0.9989, &[1.0, 0.0176]),
            ("b", -0.9858, &[0.0318]),
        ],
        final_length: 0.0318,
    },
    Table {
        name: "bacba",
        alphabet: &["a", "b", "c"],
        rows: &[
            ("b", 1.0, &[1.0]),
            ("a", 0.9540, &[1.0, 0.9540]),
            ("c", 0.0625, &[1.0, 0.9540, 0.0625]),
            ("b", 0.6850, &[1.0, 0.9540, 0.0625, 0.6850]),
            ("a", 0.9524, &[1.0, 0.9540, 0.0625, 0.6850, 0.9524]),
        ],
        final_length: 3.6539,
    },
    Table {
        name: "ababcbaba",
        alphabet: &["a", "b", "c"],
        rows: &[
            ("a", 1.0, &[1.0]),
            ("b", 0.9716, &[1.0, 0.9716]),
            ("a", 0.9936, &[1.0, 0.9716, 0.9936]),
            ("b", 0.9932, &[1.0, 0.9716, 0.9936, 0.9932]),
            ("c", 0.0810, &[1.0, 0.9716, 0.9936, 0.9932, 0.0810]),
            ("b", -0.9981, &[1.0, 0.9716, 0.9936, 0.0761]),
            ("a", -0.8207, &[1.0, 0.9716, 0.2491]),
            ("b", -0.8674, &[1.0, 0.3533]),
            ("a", -0.2757, &[1.0, 0.0776]),
        ],
        final_length: 1.0776,
    },
];

/// The recorded runs push 0.0625, so their no-op threshold sat below it.
const REPLAY_EPSILON: f64 = 0.05;

fn stack_replay() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut finals = Vec::new();
    for t in &TABLES {
        let a = Alphabet::new(t.alphabet, None).unwrap();
        let actions: Vec<(f64, usize)> = t
            .rows
            .iter()
            .map(|(s, x, _)| (*x, a.index_of(s).unwrap()))
            .collect();
        let steps = replay_trace(
            &ContinuousStack::new(),
            &actions,
            a.len(),
            REPLAY_EPSILON,
        )
        .unwrap();
        for (st, (_, _, want)) in steps.iter().zip(t.rows) {
            let got: Vec<f64> = st.stack.segments().iter().map(|g| g.length).collect();
            if got.len() != want.len() {
                return outcome(
                    false,
                    format!("{}: segment count {} vs {}", t.name, got.len(), want.len()),
                );
            }
            for (g, w) in got.iter().zip(*want) {
                worst = worst.max((g - w).abs());
            }
        }
        let l = steps.last().unwrap().stack.total_length();
        worst = worst.max((l - t.final_length).abs());
        finals.push(format!("{}={l:.4}", t.name));
    }
    outcome(
        worst <= 1e-4,
        format!(
            "max deviation {worst:.1e}; final lengths {}",
            finals.join(" ")
        ),
    )
}

// ---------------------------------------------------------------------------
// length recursion

fn length_recursion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    let mut worst_mass: f64 = 0.0;
    while checked < 100_000 {
        let n = rng.gen_range(0..6);
        let segs: Vec<(usize, f64)> = (0..n)
            .map(|_| (rng.gen_range(0..3), rng.gen_range(0.01..1.0)))
            .collect();
        let s = ContinuousStack::from_segments(&segs).unwrap();
        let a: f64 = rng.gen_range(-1.0..1.0);
        let (next, out) = s
            .apply_action(a, rng.gen_range(0..3), stack::DEFAULT_EPSILON)
            .unwrap();
        if out.is_pop_empty() {
            continue;
        }
        let expect = if a.abs() <= stack::DEFAULT_EPSILON {
            0.0
        } else {
            a
        };
        let dl = next.total_length() - s.total_length();
        // lengths are tracked as L + A, so the difference is exact up to the
        // one rounding of that sum
        if next.total_length() != s.total_length() + expect {
            return outcome(
                false,
                format!("L' != L + A at L={}, A={a}", s.total_length()),
            );
        }
        let _ = dl;
        let mass = next.read(3).vector.sum();
        worst_mass = worst_mass.max((mass - next.total_length().min(1.0)).abs());
        checked += 1;
    }
    outcome(
        worst_mass <= 1e-9,
        format!("{checked} pairs, L' = L + A exactly, max |mass - min(1,L)| = {worst_mass:.1e}"),
    )
}

// ---------------------------------------------------------------------------
// extended state

fn normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=8);
        let s: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let p = extended_state(&s).unwrap();
        worst = worst.max((p.iter().sum::<f64>() - 1.0).abs());
    }
    let mut max_a: f64 = 0.0;
    for _ in 0..10_000 {
        let ns = rng.gen_range(1..=4);
        let shape = NetworkShape::new(ns, 3, true).unwrap();
        let w = WeightSet::random(
            Order::FullOrderAction,
            ActionActivation::Linear,
            shape,
            3.0,
            &mut rng,
        )
        .unwrap();
        let s: Vec<f64> = (0..ns).map(|_| rng.gen::<f64>()).collect();
        // a depth-one window plus the empty part sums to one
        let mut r: Vec<f64> = (0..shape.n_read).map(|_| rng.gen::<f64>()).collect();
        let tot: f64 = r.iter().sum();
        r.iter_mut().for_each(|x| *x /= tot);
        let mut input = vec![0.0; 3];
        input[rng.gen_range(0..3)] = 1.0;
        let out = w.step_parts(&s, &r, &input).unwrap();
        max_a = max_a.max(out.action.abs());
    }
    outcome(
        worst <= 1e-12 && max_a <= 1.0,
        format!("max |sum P - 1| = {worst:.1e}, max |A| = {max_a:.6}"),
    )
}

// ---------------------------------------------------------------------------
// gradients

fn frozen_fd(order: Order, act: ActionActivation, empty: bool, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = NetworkShape::new(3, 3, empty).unwrap();
    let w = WeightSet::random(order, act, shape, 1.0, &mut rng).unwrap();
    let len = rng.gen_range(1..=4);
    let inputs: Vec<usize> = (0..len).map(|_| rng.gen_range(0..3)).collect();
    let reads: Vec<Vec<f64>> = (0..len)
        .map(|_| (0..shape.n_read).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let run = frozen_reading_run(&w, &inputs, &reads).unwrap();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let rel = |fd: f64, an: f64| (fd - an).abs() / fd.abs().max(an.abs()).max(1e-3);
    for p in 0..w.n_params() {
        let mut wp = w.clone();
        wp.params_mut()[p] += h;
        let mut wm = w.clone();
        wm.params_mut()[p] -= h;
        let rp = frozen_reading_run(&wp, &inputs, &reads).unwrap();
        let rm = frozen_reading_run(&wm, &inputs, &reads).unwrap();
        for i in 0..3 {
            let fd = (rp.final_state[i] - rm.final_state[i]) / (2.0 * h);
            worst = worst.max(rel(fd, run.sens.ds_row(i)[p]));
        }
        let fd = (rp.action_sum - rm.action_sum) / (2.0 * h);
        worst = worst.max(rel(fd, run.sens.dl[p]));
    }
    worst
}

fn reading_fd(initial: &[(usize, f64)], action: f64, symbol: usize, empty: bool) -> f64 {
    let shape = NetworkShape::new(2, 3, empty).unwrap();
    let s0 = ContinuousStack::from_segments(initial).unwrap();
    let read_at = |a: f64| {
        let (s, _) = s0.apply_action(a, symbol, stack::DEFAULT_EPSILON).unwrap();
        reading_vector(&s, &shape).0
    };
    let (s, out) = s0
        .apply_action(action, symbol, stack::DEFAULT_EPSILON)
        .unwrap();
    let (_, reading) = reading_vector(&s, &shape);
    let d = reading_derivative(&reading, &out, &shape);
    let h = 1e-5;
    let (rp, rm) = (read_at(action + h), read_at(action - h));
    (0..shape.n_read)
        .map(|k| ((rp[k] - rm[k]) / (2.0 * h) - d[k]).abs())
        .fold(0.0, f64::max)
}

fn jacobian_fd() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut worst: f64 = 0.0;
    let h = 1e-7;
    for trial in 0..200 {
        let n = rng.gen_range(1..=5);
        let s: Vec<f64> = (0..n)
            .map(|m| match (trial + m) % 4 {
                // saturated components
                0 => 2e-7,
                1 => 1.0 - 2e-7,
                _ => rng.gen_range(0.001..0.999),
            })
            .collect();
        let jac = extended_state_jacobian(&s);
        for m in 0..n {
            let mut sp = s.clone();
            sp[m] += h;
            let mut sm = s.clone();
            sm[m] -= h;
            let (pp, pm) = (extended_state(&sp).unwrap(), extended_state(&sm).unwrap());
            for j in 0..pp.len() {
                let fd = (pp[j] - pm[j]) / (2.0 * h);
                let an = jac[j * n + m];
                worst = worst.max((fd - an).abs() / an.abs().max(1.0));
            }
        }
    }
    worst
}

fn gradient_suite() -> Outcome {
    let variants = [
        (Order::Second, ActionActivation::Sigmoid2, false),
        (Order::Third, ActionActivation::Sigmoid2, false),
        (Order::FullOrderAction, ActionActivation::Sigmoid2, true),
        (Order::FullOrderAction, ActionActivation::Linear, true),
    ];
    let mut a_worst: f64 = 0.0;
    for (v, &(o, act, e)) in variants.iter().enumerate() {
        for seed in 0..5 {
            a_worst = a_worst.max(frozen_fd(o, act, e, 100 * v as u64 + seed));
        }
    }
    // window spans two sections after a push and after a pop, and a partial
    // window read against the empty-stack neuron
    let b_worst = [
        reading_fd(&[(0, 0.6)], 0.7, 1, false),
        reading_fd(&[(0, 0.6), (1, 0.9), (2, 0.8)], -0.5, 0, false),
        reading_fd(&[(0, 0.6), (1, 0.9), (2, 0.8)], -0.5, 0, true),
        reading_fd(&[(0, 0.3)], 0.4, 1, true),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let c_worst = jacobian_fd();
    outcome(
        a_worst <= 1e-4 && b_worst <= 1e-4 && c_worst <= 1e-6,
        format!(
            "frozen-reading RTRL rel {a_worst:.1e}; reading derivative abs {b_worst:.1e}; dP/dS rel {c_worst:.1e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// construction and extraction

fn constructed(pda: &DiscretePda) -> WeightSet {
    let shape = NetworkShape::new(pda.n_states() + 1, pda.alphabet().len(), true).unwrap();
    construct_from_pda(pda, &shape, &ConstructOptions::default()).unwrap()
}

fn agree_exhaustive(w: &WeightSet, pda: &DiscretePda, max_len: usize) -> (usize, usize) {
    let a = pda.alphabet();
    let strings: Vec<Vec<usize>> = enumerate_strings(a, max_len)
        .filter(|s| !s.is_empty())
        .collect();
    let bad = strings
        .par_iter()
        .filter(|s| {
            let run = run_sequence(w, a, s, stack::DEFAULT_EPSILON).unwrap();
            let analog = classify(
                &run,
                ClassifyRule::HMeasure,
                training::DEFAULT_POP_EMPTY_TOLERANCE,
            );
            analog.is_legal() != run_pda(pda, s).is_legal()
        })
        .count();
    (strings.len(), bad)
}

fn construction_fidelity() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, pda) in [("paren", paren_pda()), ("palindrome", palindrome_pda())] {
        let w = constructed(&pda);
        let (n, bad) = agree_exhaustive(&w, &pda, 10);
        pass &= bad == 0;
        parts.push(format!("{name}: {bad} disagreements over {n} strings"));
    }
    outcome(pass, parts.join("; "))
}

fn random_pda(rng: &mut ChaCha8Rng) -> DiscretePda {
    let a = Alphabet::new(&["0", "1", "e"], Some("e")).unwrap();
    let n = rng.gen_range(2..=4);
    let mut p = DiscretePda::with_numbered_states(a, n, 0).unwrap();
    for q in 0..n {
        for l in 0..3 {
            for r in [None, Some(0), Some(1), Some(2)] {
                let act = match rng.gen_range(0..3) {
                    0 => StackAction::Push,
                    1 => StackAction::Pop,
                    _ => StackAction::NoOp,
                };
                p.add_rule(q, l, r, rng.gen_range(0..n), act).unwrap();
            }
        }
        p.set_accept(q, rng.gen_bool(0.4));
    }
    p
}

fn extraction_round_trip() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, pda) in [("paren", paren_pda()), ("palindrome", palindrome_pda())] {
        let w = constructed(&pda);
        let got = reduce_pda(&extract_pda(&w, pda.alphabet(), &ExtractOptions::default()).unwrap());
        let iso = got.is_isomorphic(&reduce_pda(&pda.trim()));
        pass &= iso;
        parts.push(format!("{name} isomorphic: {iso}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut bad_machines = 0;
    for _ in 0..50 {
        let pda = random_pda(&mut rng);
        let w = constructed(&pda);
        let ok = match extract_pda(&w, pda.alphabet(), &ExtractOptions::default()) {
            Ok(x) => {
                let x = reduce_pda(&x);
                enumerate_strings(pda.alphabet(), 8)
                    .all(|s| run_pda(&x, &s).is_legal() == run_pda(&pda, &s).is_legal())
            }
            Err(_) => false,
        };
        if !ok {
            bad_machines += 1;
        }
    }
    pass &= bad_machines == 0;
    parts.push(format!(
        "random machines not equivalent to length 8: {bad_machines}/50"
    ));
    outcome(pass, parts.join("; "))
}

// ---------------------------------------------------------------------------
// training experiments

fn extraction_errors(
    w: &WeightSet,
    g: Grammar,
    q: StateQuantizer,
    max_len: usize,
) -> Option<usize> {
    let a = g.alphabet();
    let opts = ExtractOptions {
        quantizer: q,
        ..Default::default()
    };
    let pda = reduce_pda(&extract_pda(w, &a, &opts).ok()?);
    let strings: Vec<Vec<usize>> = enumerate_strings(&a, max_len).collect();
    Some(
        strings
            .par_iter()
            .filter(|s| run_pda(&pda, s).is_legal() != g.accepts(s))
            .count(),
    )
}

fn paren_experiment() -> Outcome {
    let g = Grammar::Paren;
    let a = g.alphabet();
    let ds = build_dataset(g, &DatasetSpec::paren(), 0).unwrap();
    let rows: Vec<(u64, bool, usize, Option<usize>)> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let cfg = TrainingConfig::paren(seed);
            let w = init_weights(&cfg, &a).unwrap();
            let res = train(&w, std::slice::from_ref(&ds), &cfg).unwrap();
            let ev = evaluate(&res.weights, &ds, &cfg).unwrap();
            let full = ev.accuracy == 1.0;
            let epochs = res
                .metrics
                .iter()
                .position(|m| m.accuracy == 1.0)
                .map_or(0, |i| i + 1);
            let errs = full
                .then(|| extraction_errors(&res.weights, g, StateQuantizer::five_levels(), 14))
                .flatten();
            (seed, full, epochs, errs)
        })
        .collect();
    let converged: Vec<_> = rows.iter().filter(|r| r.1).collect();
    let winner = converged.iter().find(|r| r.3 == Some(0));
    let summary: Vec<String> = converged
        .iter()
        .map(|r| {
            format!(
                "seed {} (100% at epoch {}, extraction errors {:?})",
                r.0, r.2, r.3
            )
        })
        .collect();
    outcome(
        winner.is_some(),
        format!(
            "{} of 10 seeds reach 100%; {}",
            converged.len(),
            if summary.is_empty() {
                "none".into()
            } else {
                summary.join(", ")
            }
        ),
    )
}

/// Train, test every string up to the test length, add all errors, lengthen
/// the test by one and repeat until no errors remain or the rounds run out.
fn anbn_loop(seed: u64, rounds: usize, first_test_len: usize) -> (bool, usize, WeightSet) {
    let g = Grammar::Anbn;
    let a = g.alphabet();
    let cfg = TrainingConfig::anbn(seed);
    let mut ds = anbn_fixture();
    let mut w = init_weights(&cfg, &a).unwrap();
    for round in 1..=rounds {
        w = train(&w, std::slice::from_ref(&ds), &cfg).unwrap().weights;
        let ev = evaluate(&w, &ds, &cfg).unwrap();
        let test_len = first_test_len + round - 1;
        let errs = augment_with_errors(&w, &a, test_len, g, &cfg).unwrap();
        if errs.is_empty() && ev.accuracy == 1.0 {
            return (true, round, w);
        }
        for (s, l) in errs {
            ds.push(s, l);
        }
    }
    (false, rounds, w)
}

fn anbn_experiment() -> Outcome {
    let rows: Vec<(u64, bool, usize, Option<usize>)> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let (done, rounds, w) = anbn_loop(seed, 8, 8);
            let errs = done
                .then(|| extraction_errors(&w, Grammar::Anbn, StateQuantizer::Binary, 16))
                .flatten();
            (seed, done, rounds, errs)
        })
        .collect();
    let done: Vec<_> = rows.iter().filter(|r| r.1).collect();
    let winner = done.iter().find(|r| r.3 == Some(0));
    let summary: Vec<String> = done
        .iter()
        .map(|r| format!("seed {} ({} rounds, extraction errors {:?})", r.0, r.2, r.3))
        .collect();
    outcome(
        winner.is_some(),
        format!(
            "{} of 10 seeds terminate within 8 rounds; {}",
            done.len(),
            if summary.is_empty() {
                "none".into()
            } else {
                summary.join(", ")
            }
        ),
    )
}

fn palindrome_experiment() -> Outcome {
    let g = Grammar::Palindrome;
    let a = g.alphabet();
    let stages = [
        build_dataset(g, &DatasetSpec::palindrome_stage(1), 0).unwrap(),
        build_dataset(g, &DatasetSpec::palindrome_stage(2), 0).unwrap(),
    ];
    let errors: Vec<(u64, f64, f64)> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let cfg = TrainingConfig::palindrome(seed);
            let w = init_weights(&cfg, &a).unwrap();
            match train(&w, &stages, &cfg) {
                Ok(res) => {
                    let best = res
                        .metrics
                        .iter()
                        .filter(|m| m.stage == 2)
                        .map(|m| m.mean_error)
                        .fold(f64::INFINITY, f64::min);
                    let acc = res.final_metrics().map_or(0.0, |m| m.accuracy);
                    (seed, best, acc)
                }
                Err(_) => (seed, f64::INFINITY, 0.0),
            }
        })
        .collect();
    let best = errors
        .iter()
        .copied()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();
    outcome(
        best.1 <= 0.1,
        format!(
            "best averaged error {:.4} (seed {}, final training accuracy {:.3})",
            best.1, best.0, best.2
        ),
    )
}

// ---------------------------------------------------------------------------
// quantization

fn quantization() -> Outcome {
    let mut fails = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            fails.push(what.to_string());
        }
    };
    // three-way action threshold, strict at the boundary
    check(quantize_action(0.5, 0.5) == 0, "A = 0.5");
    check(quantize_action(0.500001, 0.5) == 1, "A just above 0.5");
    check(quantize_action(-0.5, 0.5) == 0, "A = -0.5");
    check(quantize_action(-0.500001, 0.5) == -1, "A just below -0.5");
    check(
        quantize_action(0.7, 0.5) == 1
            && quantize_action(-0.6, 0.5) == -1
            && quantize_action(0.3, 0.5) == 0,
        "A cases",
    );

    // ternary action weights
    let shape = NetworkShape::new(2, 3, true).unwrap();
    let mut w = WeightSet::zeros(Order::FullOrderAction, ActionActivation::Linear, shape).unwrap();
    let vals = [0.6, -0.51, 0.2, 0.5, -0.5, 1.0, -1.0];
    for (x, v) in w.w_action_mut().iter_mut().zip(vals) {
        *x = v;
    }
    let q = quantize_action_weights(&w, 0.5).unwrap();
    check(
        q[..7] == [1, -1, 0, 0, 0, 1, -1],
        "action weight thresholds",
    );
    let pal = palindrome_pda();
    let shape = NetworkShape::new(pal.n_states() + 1, 3, true).unwrap();
    let full = construct_from_pda(
        &pal,
        &shape,
        &ConstructOptions {
            order: Order::FullOrderAction,
            ..Default::default()
        },
    )
    .unwrap();
    let q = quantize_action_weights(&full, 0.5).unwrap();
    check(
        q.iter().zip(full.w_action()).all(|(&t, &x)| t as f64 == x),
        "constructed ternary tensor is a fixed point",
    );

    // state mappings on recorded vectors
    let five = StateQuantizer::five_levels();
    let bin = StateQuantizer::Binary;
    let cases: [(&[f64], &[f64], &[f64]); 4] = [
        (
            &[0.0079, 0.9952, 0.0160, 0.9580],
            &[0.0, 1.0, 0.0, 1.0],
            &[0.0, 1.0, 0.0, 1.0],
        ),
        (
            &[0.2055, 0.9749, 0.6775, 0.0003],
            &[0.25, 1.0, 0.75, 0.0],
            &[0.0, 1.0, 1.0, 0.0],
        ),
        (
            &[0.0030, 0.9977, 0.4301, 0.9684],
            &[0.0, 1.0, 0.5, 1.0],
            &[0.0, 1.0, 0.0, 1.0],
        ),
        (
            &[0.2890, 0.9472, 0.9021, 0.0260],
            &[0.25, 1.0, 1.0, 0.0],
            &[0.0, 1.0, 1.0, 0.0],
        ),
    ];
    for (s, f, b) in cases {
        check(five.quantize(s).unwrap() == f, "five-level mapping");
        check(bin.quantize(s).unwrap() == b, "binary mapping");
    }
    check(
        five.quantize(&[0.125, 0.375, 0.625, 0.875]).unwrap() == [0.25, 0.5, 0.75, 1.0],
        "five-level ties round up",
    );
    check(
        bin.quantize(&[0.5, 0.4999]).unwrap() == [1.0, 0.0],
        "binary boundary",
    );
    check(
        five.quantize(&[0.13, 0.6, 0.9]).unwrap() == [0.25, 0.5, 1.0],
        "segment bounds",
    );
    outcome(
        fails.is_empty(),
        if fails.is_empty() {
            "action, weight and state thresholds as specified".to_string()
        } else {
            format!("failed: {}", fails.join(", "))
        },
    )
}

type Criterion = (&'static str, bool, fn() -> Outcome);

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    // (name, hard?, runner)
    let criteria: [Criterion; 10] = [
        ("stack trace replay", true, stack_replay),
        ("length recursion", true, length_recursion),
        ("extended-state normalization", true, normalization),
        ("gradient suite", true, gradient_suite),
        ("construction fidelity", true, construction_fidelity),
        ("extraction round trip", true, extraction_round_trip),
        ("parenthesis experiment", true, paren_experiment),
        ("1^n 0^n iterative loop", true, anbn_experiment),
        ("palindrome training (soft)", false, palindrome_experiment),
        ("quantization checks", true, quantization),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut hard_failures = 0;
    for (name, hard, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let o = run();
        let tag = match (o.pass, hard) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (soft, reported only)",
        };
        println!(
            "[{tag}] {name}: {} ({:.1}s)",
            o.detail,
            t0.elapsed().as_secs_f64()
        );
        if !o.pass && hard {
            hard_failures += 1;
        }
    }
    if hard_failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{hard_failures} hard criteria failed");
        ExitCode::FAILURE
    }
}
