use std::collections::HashMap;

use crate::alphabet::Alphabet;
use crate::controller::WeightSet;
use crate::error::{Error, Result};

use super::pda::{explore, DiscretePda, StackAction};
use super::quantize::{quantize_action, StateQuantizer};

/// How states whose last neuron is off are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TrapMode {
    /// No trap states.
    #[default]
    Off,
    /// Trap states are flagged and given a push self-loop on every input.
    Absorbing,
    /// Trap states are flagged but keep the transitions the network produces.
    Leaky,
}

#[derive(Clone, Debug)]
pub struct ExtractOptions {
    pub quantizer: StateQuantizer,
    pub action_threshold: f64,
    /// Cap on distinct quantized states before giving up.
    pub max_states: usize,
    pub trap_mode: TrapMode,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            quantizer: StateQuantizer::Binary,
            action_threshold: 0.5,
            max_states: 4096,
            trap_mode: TrapMode::Off,
        }
    }
}

fn label_key(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

fn label_text_with(v: &[f64], digits: usize) -> String {
    if v.iter().all(|&x| x == 0.0 || x == 1.0) {
        v.iter()
            .map(|&x| if x == 1.0 { '1' } else { '0' })
            .collect()
    } else {
        v.iter()
            .map(|x| {
                let s = format!("{x:.digits$}");
                s.trim_end_matches('0').trim_end_matches('.').to_string()
            })
            .collect::<Vec<_>>()
            .join("/")
    }
}

/// Searches the quantized dynamics from the initial state and empty stack.
///
/// A node is a quantized state seen with a given top-of-stack symbol. At each
/// node every input is fed through the controller with one-hot state, reading
/// and input; the next state and the action are quantized and drive a stack
/// of unit-length symbols. Accepting states are those whose last neuron
/// quantizes to at least one half.
pub fn extract_pda(
    weights: &WeightSet,
    alphabet: &Alphabet,
    opts: &ExtractOptions,
) -> Result<DiscretePda> {
    let shape = *weights.shape();
    if alphabet.len() != shape.n_input {
        return Err(Error::Dimension(format!(
            "alphabet has {} symbols, network expects {}",
            alphabet.len(),
            shape.n_input
        )));
    }
    let q = &opts.quantizer;
    let mut labels: Vec<Vec<f64>> = Vec::new();
    let mut ids: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut intern = |v: Vec<f64>, labels: &mut Vec<Vec<f64>>| {
        *ids.entry(label_key(&v)).or_insert_with(|| {
            labels.push(v);
            labels.len() - 1
        })
    };
    let start_label = q.quantize(weights.initial_state())?;
    let start = intern(start_label, &mut labels);

    let is_trap = |v: &[f64]| v.last().is_some_and(|&x| x < 0.5);
    let mut reading = vec![0.0; shape.n_read];
    let mut input = vec![0.0; shape.n_input];

    let explored = {
        let labels = &mut labels;
        explore(start, alphabet.len(), opts.max_states, |state, l, r| {
            let s = labels[state].clone();
            if opts.trap_mode == TrapMode::Absorbing && is_trap(&s) {
                return Ok(Some((state, StackAction::Push)));
            }
            reading.iter_mut().for_each(|x| *x = 0.0);
            match r {
                Some(k) => reading[k] = 1.0,
                None if shape.has_empty_stack_neuron() => reading[shape.n_input] = 1.0,
                None => {}
            }
            input.iter_mut().for_each(|x| *x = 0.0);
            input[l] = 1.0;
            let out = weights.step_parts(&s, &reading, &input)?;
            let next = q.quantize(&out.state)?;
            let act = StackAction::from_value(quantize_action(out.action, opts.action_threshold));
            Ok(Some((intern(next, labels), act)))
        })?
    };

    // centres closer than the printed precision get more digits
    let mut names: Vec<String> = Vec::new();
    for digits in [4, 8, 12, 17] {
        names = labels.iter().map(|v| label_text_with(v, digits)).collect();
        let distinct: std::collections::HashSet<&String> = names.iter().collect();
        if distinct.len() == names.len() {
            break;
        }
    }
    let mut pda = DiscretePda::new(alphabet.clone(), names, start)?;
    for (i, v) in labels.iter().enumerate() {
        pda.set_accept(i, v.last().is_some_and(|&x| x >= 0.5));
        if opts.trap_mode != TrapMode::Off {
            pda.set_trap(i, is_trap(v));
        }
    }
    for (&(state, l, r), t) in &explored.rules {
        if let Some((target, action)) = *t {
            pda.add_rule(state, l, r, target, action)?;
        }
    }
    Ok(pda)
}
