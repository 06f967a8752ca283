use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alphabet::Alphabet;
use crate::controller::{reading_derivative, reading_vector, run_sequence, WeightSet};
use crate::error::{Error, Result};
use crate::grammars::{enumerate_strings, Grammar, Label, LabeledDataset};
use crate::stack::{ActionKind, ContinuousStack};

use super::config::{Mode, Objective, PopEmptyPolicy, TrainingConfig};
use super::rtrl::Sensitivities;
use super::{classify, error_unified};

/// What one supervised pass over a string produced.
#[derive(Clone, Debug, PartialEq)]
pub struct StringOutcome {
    /// Error of the objective in force.
    pub error: f64,
    /// Weight change, already scaled by the learning rate.
    pub delta: Vec<f64>,
    /// Deficit of the pop-empty event that ended or marked the string.
    pub pop_empty: Option<f64>,
    /// Index of the symbol at which a dead prefix sent the string to the trap.
    pub trapped_at: Option<usize>,
    pub s_last: f64,
    pub length: f64,
}

/// Runs a string with sensitivities and returns the weight change prescribed
/// by the objective and pop-empty policy.
pub fn train_string(
    weights: &WeightSet,
    alphabet: &Alphabet,
    sens: &mut Sensitivities,
    tokens: &[usize],
    label: Label,
    config: &TrainingConfig,
    eta: f64,
) -> Result<StringOutcome> {
    let shape = *weights.shape();
    let ns = shape.n_state;
    let last = ns - 1;
    let p = weights.n_params();
    let dead_at = match (config.objective, config.grammar) {
        (Objective::TrapState, Some(g)) => g.dead_prefix(tokens),
        (Objective::TrapState, None) => {
            return Err(Error::Config("trap_state objective needs a grammar".into()))
        }
        _ => None,
    };

    sens.reset();
    let mut s = weights.initial_state().to_vec();
    let mut stack = ContinuousStack::new();
    let (mut r, _) = reading_vector(&stack, &shape);
    let mut input = vec![0.0; shape.n_input];
    let seq = tokens.iter().copied().chain(alphabet.end_symbol());
    let mut pop_empty = None;

    let finish =
        |error: f64, delta: Vec<f64>, pop_empty, trapped_at, s_last, length| StringOutcome {
            error,
            delta,
            pop_empty,
            trapped_at,
            s_last,
            length,
        };

    for (t, sym) in seq.enumerate() {
        input.fill(0.0);
        input[sym] = 1.0;
        let out = sens.propagate(weights, &s, &r, &input);
        if !out.action.is_finite() || out.state.iter().any(|x| !x.is_finite()) || !sens.is_finite()
        {
            return Err(Error::NonFinite(format!(
                "training run at step {t} of `{}`",
                alphabet.render(tokens)
            )));
        }
        let outcome = stack.apply_in_place(out.action.clamp(-1.0, 1.0), sym, config.epsilon)?;
        s = out.state;

        if let ActionKind::PopEmpty { deficit } = outcome.kind {
            if deficit < config.pop_empty_tolerance {
                // too small to reject the string: clamp and carry on
                sens.clear_length();
            } else {
                pop_empty = Some(deficit);
                let grow = |sens: &Sensitivities| {
                    let delta: Vec<f64> = sens.dl.iter().map(|d| eta * deficit * d).collect();
                    finish(deficit * deficit, delta, Some(deficit), None, s[last], 0.0)
                };
                match (config.pop_empty_policy, label) {
                    (PopEmptyPolicy::StopAndGrowStack, _)
                    | (PopEmptyPolicy::StopWithHint, Label::Legal)
                    | (PopEmptyPolicy::IllegalOnlySkip, Label::Legal) => return Ok(grow(sens)),
                    (PopEmptyPolicy::StopWithHint, Label::Illegal) => {
                        let delta: Vec<f64> = sens.dl.iter().map(|d| -eta * d).collect();
                        return Ok(finish(0.0, delta, Some(deficit), None, s[last], 0.0));
                    }
                    (PopEmptyPolicy::IllegalOnlySkip, Label::Illegal) => {
                        return Ok(finish(0.0, vec![0.0; p], Some(deficit), None, s[last], 0.0));
                    }
                    (PopEmptyPolicy::Ignore, _) => sens.clear_length(),
                }
            }
        }

        let (nr, reading) = reading_vector(&stack, &shape);
        let d = reading_derivative(&reading, &outcome, &shape);
        sens.set_reading(&d);
        r = nr;

        if dead_at == Some(t) {
            let sl = s[last];
            let delta: Vec<f64> = sens
                .ds_row(last)
                .iter()
                .map(|x| eta * (0.0 - sl) * x)
                .collect();
            return Ok(finish(
                sl * sl,
                delta,
                pop_empty,
                Some(t),
                sl,
                stack.total_length(),
            ));
        }
    }

    let sl = s[last];
    let l = stack.total_length();
    let ds = sens.ds_row(last);
    let (error, delta) = match config.objective {
        Objective::Unified => {
            let (e, v) = error_unified(sl, l, label);
            let c = v + l - sl;
            let delta = ds
                .iter()
                .zip(&sens.dl)
                .map(|(a, b)| eta * c * (a - b))
                .collect();
            (e, delta)
        }
        Objective::TrapState => {
            let (gap_l, err_l) = match label {
                Label::Legal => (-l, l * l),
                Label::Illegal => {
                    let gap = if l >= 0.9 { 0.1 } else { 1.0 - l };
                    (gap, (1.0 - l).max(0.0).powi(2))
                }
            };
            let gap_s = 1.0 - sl;
            let delta = ds
                .iter()
                .zip(&sens.dl)
                .map(|(a, b)| eta * (gap_s * a + gap_l * b))
                .collect();
            (gap_s * gap_s + err_l, delta)
        }
    };
    Ok(finish(error, delta, pop_empty, None, sl, l))
}

/// Objective error of one string without touching the weights.
fn string_error(
    weights: &WeightSet,
    alphabet: &Alphabet,
    tokens: &[usize],
    label: Label,
    config: &TrainingConfig,
) -> Result<f64> {
    let mut sens = Sensitivities::new(weights);
    Ok(train_string(weights, alphabet, &mut sens, tokens, label, config, 0.0)?.error)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub mean_error: f64,
    /// Indices of misclassified entries.
    pub misclassified: Vec<usize>,
}

/// Classifies every entry with a plain run and averages the objective error.
pub fn evaluate(
    weights: &WeightSet,
    dataset: &LabeledDataset,
    config: &TrainingConfig,
) -> Result<Evaluation> {
    if dataset.is_empty() {
        return Ok(Evaluation {
            accuracy: 1.0,
            mean_error: 0.0,
            misclassified: Vec::new(),
        });
    }
    let results: Vec<Result<(bool, f64)>> = dataset
        .entries
        .par_iter()
        .map(|(s, l)| {
            let run = run_sequence(weights, &dataset.alphabet, s, config.epsilon)?;
            let ok = classify(&run, config.classify, config.pop_empty_tolerance) == *l;
            let e = string_error(weights, &dataset.alphabet, s, *l, config)?;
            Ok((ok, e))
        })
        .collect();
    let mut mis = Vec::new();
    let mut total = 0.0;
    for (i, r) in results.into_iter().enumerate() {
        let (ok, e) = r?;
        if !ok {
            mis.push(i);
        }
        total += e;
    }
    let n = dataset.len() as f64;
    Ok(Evaluation {
        accuracy: 1.0 - mis.len() as f64 / n,
        mean_error: total / n,
        misclassified: mis,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub stage: usize,
    pub mean_error: f64,
    pub accuracy: f64,
    pub pop_empty_count: usize,
}

impl fmt::Display for EpochMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{:.6}\t{:.6}\t{}",
            self.epoch, self.mean_error, self.accuracy, self.pop_empty_count
        )
    }
}

#[derive(Clone, Debug)]
pub struct TrainResult {
    pub weights: WeightSet,
    pub metrics: Vec<EpochMetrics>,
    /// Whether the last stage met its stopping criterion (full accuracy or
    /// the target error).
    pub converged: bool,
}

impl TrainResult {
    pub fn final_metrics(&self) -> Option<&EpochMetrics> {
        self.metrics.last()
    }
}

/// Random initial weights from the config's architecture and seed.
pub fn init_weights(config: &TrainingConfig, alphabet: &Alphabet) -> Result<WeightSet> {
    let shape = config.shape(alphabet.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut w = WeightSet::random(
        config.order,
        config.action_activation,
        shape,
        config.init_range,
        &mut rng,
    )?;
    w.set_alphabet(alphabet.clone())?;
    Ok(w)
}

fn presentation_order(
    ds: &LabeledDataset,
    max_len: Option<usize>,
    config: &TrainingConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let eligible = |i: &usize| max_len.is_none_or(|m| ds.entries[*i].0.len() <= m);
    let mut all: Vec<usize> = (0..ds.len()).filter(eligible).collect();
    if config.interleave == 0 {
        if config.shuffle {
            all.shuffle(rng);
        }
        return all;
    }
    let (mut legal, mut illegal): (Vec<usize>, Vec<usize>) =
        all.into_iter().partition(|&i| ds.entries[i].1.is_legal());
    if config.shuffle {
        legal.shuffle(rng);
        illegal.shuffle(rng);
    }
    let mut order = Vec::with_capacity(legal.len() + illegal.len());
    let mut next_legal = 0;
    for (n, &i) in illegal.iter().enumerate() {
        order.push(i);
        if (n + 1) % config.interleave == 0 && !legal.is_empty() {
            order.push(legal[next_legal % legal.len()]);
            next_legal += 1;
        }
    }
    while next_legal < legal.len() {
        order.push(legal[next_legal]);
        next_legal += 1;
    }
    order
}

/// Trains through one or more stages. Each stage has its own dataset and
/// epoch budget (`stage_epochs`, or `epochs` for every stage when empty)
/// and may stop early per the config's criteria.
pub fn train(
    weights: &WeightSet,
    stages: &[LabeledDataset],
    config: &TrainingConfig,
) -> Result<TrainResult> {
    config.validate()?;
    if stages.is_empty() || stages.iter().all(|d| d.is_empty()) {
        return Err(Error::Config("no training data".into()));
    }
    let alphabet = &stages[0].alphabet;
    let mut w = weights.clone();
    let mut sens = Sensitivities::new(&w);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
    let mut metrics = Vec::new();
    let mut converged = false;
    let mut epoch = 0;

    for (stage, ds) in stages.iter().enumerate() {
        let epochs = config
            .stage_epochs
            .get(stage)
            .copied()
            .unwrap_or(config.epochs);
        let max_len = config.length_schedule.get(stage).copied();
        converged = false;
        for _ in 0..epochs {
            epoch += 1;
            let order = presentation_order(ds, max_len, config, &mut rng);
            let mut batch = vec![0.0; w.n_params()];
            let mut pop_empty_count = 0;
            for i in order {
                let (tokens, label) = &ds.entries[i];
                let eta = if label.is_legal() {
                    config.eta * config.legal_rate_multiplier
                } else {
                    config.eta
                };
                let out = train_string(&w, alphabet, &mut sens, tokens, *label, config, eta)?;
                if out.pop_empty.is_some() {
                    pop_empty_count += 1;
                }
                match config.mode {
                    Mode::Stochastic => {
                        for (p, d) in w.params_mut().iter_mut().zip(&out.delta) {
                            *p += d;
                        }
                        w.truncate_action_weights();
                    }
                    Mode::Batch => {
                        for (b, d) in batch.iter_mut().zip(&out.delta) {
                            *b += d;
                        }
                    }
                }
            }
            if config.mode == Mode::Batch {
                for (p, d) in w.params_mut().iter_mut().zip(&batch) {
                    *p += d;
                }
                w.truncate_action_weights();
            }
            w.check_finite()?;
            let ev = evaluate(&w, ds, config)?;
            metrics.push(EpochMetrics {
                epoch,
                stage: stage + 1,
                mean_error: ev.mean_error,
                accuracy: ev.accuracy,
                pop_empty_count,
            });
            converged =
                ev.accuracy == 1.0 || config.target_error.is_some_and(|t| ev.mean_error <= t);
            let stop = (config.stop_at_full_accuracy && ev.accuracy == 1.0)
                || config.target_error.is_some_and(|t| ev.mean_error <= t);
            if stop {
                break;
            }
        }
    }
    Ok(TrainResult {
        weights: w,
        metrics,
        converged,
    })
}

type LabeledString = (Vec<usize>, Label);

/// Every non-empty string up to `max_len` that the analog machine gets wrong
/// under the config's classification rule, tolerance and epsilon.
pub fn augment_with_errors(
    weights: &WeightSet,
    alphabet: &Alphabet,
    max_len: usize,
    grammar: Grammar,
    config: &TrainingConfig,
) -> Result<Vec<(Vec<usize>, Label)>> {
    let strings: Vec<Vec<usize>> = enumerate_strings(alphabet, max_len)
        .filter(|s| !s.is_empty())
        .collect();
    let wrong: Vec<Result<Option<LabeledString>>> = strings
        .into_par_iter()
        .map(|s| {
            let truth = grammar.label(&s);
            let run = run_sequence(weights, alphabet, &s, config.epsilon)?;
            let got = classify(&run, config.classify, config.pop_empty_tolerance);
            Ok((got != truth).then_some((s, truth)))
        })
        .collect();
    wrong.into_iter().filter_map(|r| r.transpose()).collect()
}

/// Result of running with externally supplied readings.
#[derive(Clone, Debug)]
pub struct FrozenRun {
    pub final_state: Vec<f64>,
    /// `sum_t A^t`, the stack length without clamping or no-op dead zone.
    pub action_sum: f64,
    pub sens: Sensitivities,
}

/// Runs the controller with `readings[t]` fed as `R^t` instead of the stack.
/// Useful for checking the state and action recursions in isolation.
pub fn frozen_reading_run(
    weights: &WeightSet,
    inputs: &[usize],
    readings: &[Vec<f64>],
) -> Result<FrozenRun> {
    if readings.len() != inputs.len() {
        return Err(Error::Dimension("one reading per input is required".into()));
    }
    let shape = weights.shape();
    let mut sens = Sensitivities::new(weights);
    let mut s = weights.initial_state().to_vec();
    let mut input = vec![0.0; shape.n_input];
    let mut action_sum = 0.0;
    for (&sym, r) in inputs.iter().zip(readings) {
        if r.len() != shape.n_read {
            return Err(Error::Dimension("reading length".into()));
        }
        input.fill(0.0);
        input[sym] = 1.0;
        let out = sens.propagate(weights, &s, r, &input);
        action_sum += out.action;
        s = out.state;
    }
    Ok(FrozenRun {
        final_state: s,
        action_sum,
        sens,
    })
}
