use crate::alphabet::NetworkShape;
use crate::error::{Error, Result};
use crate::extraction::DiscretePda;

use super::{ActionActivation, Order, WeightSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstructOptions {
    /// Scale of the binary state weights; state biases are `-gain / 2`.
    pub gain: f64,
    /// `Third`, or `FullOrderAction` for a ternary linear action tensor.
    pub order: Order,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions {
            gain: 20.0,
            order: Order::Third,
        }
    }
}

/// Which neuron encodes each PDA state, and the optional accept indicator.
struct NeuronMap {
    neuron: Vec<usize>,
    indicator: Option<usize>,
}

fn map_states(pda: &DiscretePda, shape: &NetworkShape) -> Result<NeuronMap> {
    let n = pda.n_states();
    let ns = shape.n_state;
    if n > ns {
        return Err(Error::Dimension(format!(
            "{n} states do not fit in {ns} state neurons"
        )));
    }
    let accepting: Vec<usize> = (0..n).filter(|&q| pda.is_accept(q)).collect();
    let mut neuron = vec![usize::MAX; n];
    neuron[pda.start()] = 0;
    if n < ns {
        let mut next = 1;
        for (q, slot) in neuron.iter_mut().enumerate() {
            if q != pda.start() {
                *slot = next;
                next += 1;
            }
        }
        return Ok(NeuronMap {
            neuron,
            indicator: Some(ns - 1),
        });
    }
    // No spare neuron: the single accept state must sit on the last neuron.
    match accepting.as_slice() {
        [acc] if *acc != pda.start() || n == 1 => {
            neuron[*acc] = ns - 1;
            let mut next = 1;
            for (q, slot) in neuron.iter_mut().enumerate() {
                if q != pda.start() && q != *acc {
                    *slot = next;
                    next += 1;
                }
            }
            Ok(NeuronMap {
                neuron,
                indicator: None,
            })
        }
        _ => Err(Error::Dimension(
            "acceptance needs its own neuron: add one state neuron or use a single non-start accept state".into(),
        )),
    }
}

impl NeuronMap {
    fn state_vector(&self, pda: &DiscretePda, q: usize, ns: usize) -> Vec<f64> {
        let mut v = vec![0.0; ns];
        v[self.neuron[q]] = 1.0;
        if let Some(ind) = self.indicator {
            if pda.is_accept(q) {
                v[ind] = 1.0;
            }
        }
        v
    }

    fn corner(&self, pda: &DiscretePda, q: usize) -> usize {
        let mut j = 1usize << self.neuron[q];
        if let Some(ind) = self.indicator {
            if pda.is_accept(q) {
                j |= 1 << ind;
            }
        }
        j
    }
}

/// Encodes a deterministic PDA as controller weights.
///
/// Each state gets one neuron (start on neuron 0) and the last neuron is on
/// exactly in accepting states. A rule `(q, input l, reading k) -> q'` sets
/// `W^s[q'][q][k][l] = gain`, the action weight carries `gain * {+1, 0, -1}`
/// (or the bare ternary value in the full-order variant), and the empty
/// stack is read through the empty-stack neuron. With large gain the
/// quantized run of the network equals the discrete run.
pub fn construct_from_pda(
    pda: &DiscretePda,
    shape: &NetworkShape,
    opts: &ConstructOptions,
) -> Result<WeightSet> {
    shape.validate()?;
    if !shape.has_empty_stack_neuron() {
        return Err(Error::Dimension(
            "construction needs the empty-stack reading neuron".into(),
        ));
    }
    if pda.alphabet().len() != shape.n_input {
        return Err(Error::Dimension(format!(
            "alphabet has {} symbols, shape has {} inputs",
            pda.alphabet().len(),
            shape.n_input
        )));
    }
    let activation = match opts.order {
        Order::Third => ActionActivation::Sigmoid2,
        Order::FullOrderAction => ActionActivation::Linear,
        Order::Second => {
            return Err(Error::WrongVariant(
                "construction produces third or full order".into(),
            ))
        }
    };
    let map = map_states(pda, shape)?;
    let ns = shape.n_state;
    let gain = opts.gain;
    let mut w = WeightSet::zeros(opts.order, activation, *shape)?;
    w.set_alphabet(pda.alphabet().clone())?;
    w.set_initial_state(map.state_vector(pda, pda.start(), ns))?;

    for x in w.theta_s_mut() {
        *x = -gain / 2.0;
    }
    for (&(q, l, r), t) in pda.rules() {
        let j = map.neuron[q];
        let k = r.unwrap_or(shape.n_input);
        let target = map.state_vector(pda, t.target, ns);
        for (i, &on) in target.iter().enumerate() {
            if on == 1.0 {
                let idx = w.ws_index(i, j, k, l);
                w.w_state_mut()[idx] = gain;
            }
        }
        let act = t.action.value() as f64;
        match opts.order {
            Order::Third => {
                let idx = w.wa_index(j, k, l);
                w.w_action_mut()[idx] = gain * act;
            }
            _ => {
                let idx = w.wa_index(map.corner(pda, q), k, l);
                w.w_action_mut()[idx] = act;
            }
        }
    }
    if activation == ActionActivation::Sigmoid2 {
        w.set_theta_a(0.0)?;
    }
    Ok(w)
}
