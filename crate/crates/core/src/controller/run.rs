use crate::alphabet::{Alphabet, NetworkShape};
use crate::error::{Error, Result};
use crate::stack::{ActionKind, ActionOutcome, ContinuousStack, StackReading};

use super::{NetworkState, WeightSet};

/// The controller's view of the stack: the depth-one window masses, plus the
/// unfilled depth `1 - min(1, L)` when the shape carries an empty-stack neuron.
pub fn reading_vector(stack: &ContinuousStack, shape: &NetworkShape) -> (Vec<f64>, StackReading) {
    let reading = stack.read(shape.n_input);
    let mut v = reading.vector.0.clone();
    if shape.has_empty_stack_neuron() {
        let mass: f64 = v.iter().sum();
        v.push((1.0 - mass).max(0.0));
    }
    (v, reading)
}

/// `dR/dA` after the last action: the top section grows with the action and
/// the bottom of the window (or the empty-stack slot) loses the same mass.
/// Zero for no-ops, pop-empty events and an empty window.
pub fn reading_derivative(
    reading: &StackReading,
    outcome: &ActionOutcome,
    shape: &NetworkShape,
) -> Vec<f64> {
    let mut d = vec![0.0; shape.n_read];
    if matches!(outcome.kind, ActionKind::NoOp | ActionKind::PopEmpty { .. }) {
        return d;
    }
    let Some(r1) = reading.r1 else {
        return d;
    };
    let full = reading.vector.sum() >= 1.0 - 1e-12;
    d[r1] += 1.0;
    if full {
        if let Some(r2) = reading.r2 {
            d[r2] -= 1.0;
        }
    } else if shape.has_empty_stack_neuron() {
        d[shape.n_input] -= 1.0;
    }
    d
}

#[derive(Clone, Debug)]
pub struct RunStep {
    pub input: usize,
    pub state: Vec<f64>,
    pub action: f64,
    pub outcome: ActionOutcome,
    pub stack: ContinuousStack,
    pub reading: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RunTrace {
    pub initial_state: Vec<f64>,
    pub steps: Vec<RunStep>,
    pub final_state: NetworkState,
    pub final_stack: ContinuousStack,
    /// `(step index, deficit)` for each pop-empty event.
    pub pop_empty: Vec<(usize, f64)>,
}

impl RunTrace {
    pub fn final_length(&self) -> f64 {
        self.final_stack.total_length()
    }

    /// Last state neuron at the end of the string.
    pub fn accept_neuron(&self) -> f64 {
        *self
            .final_state
            .s
            .last()
            .expect("at least one state neuron")
    }

    pub fn max_deficit(&self) -> f64 {
        self.pop_empty.iter().map(|&(_, d)| d).fold(0.0, f64::max)
    }

    /// One row per step after an initial row: step, input, state, action,
    /// stack segments (bottom first).
    pub fn to_tsv(&self, alphabet: &Alphabet) -> String {
        let fmt_state = |s: &[f64]| {
            s.iter()
                .map(|x| format!("{x:.4}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut out = String::from("step\tinput\tstate\taction\tsegments\n");
        out.push_str(&format!("0\t-\t{}\t-\t\n", fmt_state(&self.initial_state)));
        for (t, st) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{:.4}\t{}\n",
                t + 1,
                alphabet.symbol(st.input),
                fmt_state(&st.state),
                st.action,
                st.stack.render_segments(alphabet)
            ));
        }
        out
    }
}

/// Runs the controller over `tokens` (end symbol appended when the alphabet
/// declares one), starting from the weights' initial state and an empty stack.
pub fn run_sequence(
    weights: &WeightSet,
    alphabet: &Alphabet,
    tokens: &[usize],
    epsilon: f64,
) -> Result<RunTrace> {
    let shape = *weights.shape();
    if alphabet.len() != shape.n_input {
        return Err(Error::Dimension(format!(
            "alphabet has {} symbols, network expects {}",
            alphabet.len(),
            shape.n_input
        )));
    }
    if let Some(&bad) = tokens.iter().find(|&&t| t >= alphabet.len()) {
        return Err(Error::UnknownSymbol(format!("#{bad}")));
    }
    let mut seq: Vec<usize> = tokens.to_vec();
    if let Some(e) = alphabet.end_symbol() {
        seq.push(e);
    }

    let mut s = weights.initial_state().to_vec();
    let mut stack = ContinuousStack::new();
    let (mut r, _) = reading_vector(&stack, &shape);
    let mut a = 0.0;
    let mut steps = Vec::with_capacity(seq.len());
    let mut pop_empty = Vec::new();
    let mut input = vec![0.0; shape.n_input];

    for (t, &sym) in seq.iter().enumerate() {
        input.iter_mut().for_each(|x| *x = 0.0);
        input[sym] = 1.0;
        let out = weights.step_unchecked(&s, &r, &input);
        if !out.action.is_finite() || out.state.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("controller output at step {t}")));
        }
        let outcome = stack.apply_in_place(out.action.clamp(-1.0, 1.0), sym, epsilon)?;
        if let ActionKind::PopEmpty { deficit } = outcome.kind {
            pop_empty.push((t, deficit));
        }
        r = reading_vector(&stack, &shape).0;
        s = out.state;
        a = out.action;
        steps.push(RunStep {
            input: sym,
            state: s.clone(),
            action: a,
            outcome,
            stack: stack.clone(),
            reading: r.clone(),
        });
    }

    Ok(RunTrace {
        initial_state: weights.initial_state().to_vec(),
        steps,
        final_state: NetworkState { s, r, a, input },
        final_stack: stack,
        pop_empty,
    })
}
