//! The recurrent controller: `(S, R, I) -> (S', A')` in second-order,
//! third-order and full-order-action variants.

mod construct;
mod model_io;
mod run;

pub use construct::{construct_from_pda, ConstructOptions};
pub use run::{reading_derivative, reading_vector, run_sequence, RunStep, RunTrace};

use std::fmt;
use std::ops::Range;

use rand::Rng;

use crate::alphabet::{Alphabet, NetworkShape};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    /// State and action multiply `S` with the concatenation `R ++ I`.
    Second,
    /// State and action multiply `S`, `R` and `I`.
    Third,
    /// Third-order state; the action is indexed by the binary state corners.
    FullOrderAction,
}

impl Order {
    pub fn name(self) -> &'static str {
        match self {
            Order::Second => "second",
            Order::Third => "third",
            Order::FullOrderAction => "full",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "second" => Ok(Order::Second),
            "third" => Ok(Order::Third),
            "full" | "full_order_action" => Ok(Order::FullOrderAction),
            _ => Err(Error::Config(format!("unknown order `{s}`"))),
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActionActivation {
    /// `f(x) = 2 g(x) - 1`, with a bias.
    Sigmoid2,
    /// `f(x) = x`, no bias. Only valid with [`Order::FullOrderAction`].
    Linear,
}

impl ActionActivation {
    pub fn name(self) -> &'static str {
        match self {
            ActionActivation::Sigmoid2 => "sigmoid2",
            ActionActivation::Linear => "linear",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "sigmoid2" => Ok(ActionActivation::Sigmoid2),
            "linear" => Ok(ActionActivation::Linear),
            _ => Err(Error::Config(format!("unknown action activation `{s}`"))),
        }
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Offsets of each tensor inside the flat parameter vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub w_state: Range<usize>,
    pub theta_s: Range<usize>,
    pub w_action: Range<usize>,
    pub theta_a: Option<usize>,
    pub len: usize,
}

/// Controller parameters. All tensors live in one flat vector so the RTRL
/// sensitivities can index them uniformly.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    order: Order,
    action_activation: ActionActivation,
    shape: NetworkShape,
    layout: Layout,
    params: Vec<f64>,
    initial_state: Vec<f64>,
    alphabet: Option<Alphabet>,
}

/// Inputs of one controller step.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkState {
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub a: f64,
    pub input: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutput {
    pub state: Vec<f64>,
    pub action: f64,
}

fn layout_for(order: Order, activation: ActionActivation, shape: &NetworkShape) -> Layout {
    let (ns, nr, ni) = (shape.n_state, shape.n_read, shape.n_input);
    let w_state_len = match order {
        Order::Second => ns * ns * (nr + ni),
        Order::Third | Order::FullOrderAction => ns * ns * nr * ni,
    };
    let w_action_len = match order {
        Order::Second => ns * (nr + ni),
        Order::Third => ns * nr * ni,
        Order::FullOrderAction => (1usize << ns) * nr * ni,
    };
    let w_state = 0..w_state_len;
    let theta_s = w_state.end..w_state.end + ns;
    let w_action = theta_s.end..theta_s.end + w_action_len;
    let (theta_a, len) = match activation {
        ActionActivation::Sigmoid2 => (Some(w_action.end), w_action.end + 1),
        ActionActivation::Linear => (None, w_action.end),
    };
    Layout {
        w_state,
        theta_s,
        w_action,
        theta_a,
        len,
    }
}

impl WeightSet {
    /// All-zero weights with the standard initial state `(1, 0, ...)`.
    pub fn zeros(
        order: Order,
        action_activation: ActionActivation,
        shape: NetworkShape,
    ) -> Result<Self> {
        shape.validate()?;
        if action_activation == ActionActivation::Linear && order != Order::FullOrderAction {
            return Err(Error::WrongVariant(
                "linear action requires the full-order action tensor".into(),
            ));
        }
        if order == Order::FullOrderAction && shape.n_state > 16 {
            return Err(Error::Dimension(format!(
                "{} state neurons is too many for full order",
                shape.n_state
            )));
        }
        let layout = layout_for(order, action_activation, &shape);
        let mut initial_state = vec![0.0; shape.n_state];
        initial_state[0] = 1.0;
        Ok(WeightSet {
            order,
            action_activation,
            params: vec![0.0; layout.len],
            layout,
            shape,
            initial_state,
            alphabet: None,
        })
    }

    /// Uniform weights on `[-range, range]`, biases included.
    pub fn random<R: Rng + ?Sized>(
        order: Order,
        action_activation: ActionActivation,
        shape: NetworkShape,
        range: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut w = Self::zeros(order, action_activation, shape)?;
        if range > 0.0 {
            for p in w.params.iter_mut() {
                *p = rng.gen_range(-range..=range);
            }
        }
        w.truncate_action_weights();
        Ok(w)
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn action_activation(&self) -> ActionActivation {
        self.action_activation
    }

    pub fn shape(&self) -> &NetworkShape {
        &self.shape
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn initial_state(&self) -> &[f64] {
        &self.initial_state
    }

    pub fn set_initial_state(&mut self, s: Vec<f64>) -> Result<()> {
        if s.len() != self.shape.n_state {
            return Err(Error::Dimension(format!(
                "initial state has {} entries, expected {}",
                s.len(),
                self.shape.n_state
            )));
        }
        self.initial_state = s;
        Ok(())
    }

    /// The alphabet the model was trained or built for, if recorded.
    pub fn alphabet(&self) -> Option<&Alphabet> {
        self.alphabet.as_ref()
    }

    pub fn set_alphabet(&mut self, alphabet: Alphabet) -> Result<()> {
        if alphabet.len() != self.shape.n_input {
            return Err(Error::Dimension(format!(
                "alphabet has {} symbols, network expects {}",
                alphabet.len(),
                self.shape.n_input
            )));
        }
        self.alphabet = Some(alphabet);
        Ok(())
    }

    pub fn w_state(&self) -> &[f64] {
        &self.params[self.layout.w_state.clone()]
    }

    pub fn w_state_mut(&mut self) -> &mut [f64] {
        let r = self.layout.w_state.clone();
        &mut self.params[r]
    }

    pub fn theta_s(&self) -> &[f64] {
        &self.params[self.layout.theta_s.clone()]
    }

    pub fn theta_s_mut(&mut self) -> &mut [f64] {
        let r = self.layout.theta_s.clone();
        &mut self.params[r]
    }

    pub fn w_action(&self) -> &[f64] {
        &self.params[self.layout.w_action.clone()]
    }

    pub fn w_action_mut(&mut self) -> &mut [f64] {
        let r = self.layout.w_action.clone();
        &mut self.params[r]
    }

    pub fn theta_a(&self) -> Option<f64> {
        self.layout.theta_a.map(|i| self.params[i])
    }

    pub fn set_theta_a(&mut self, v: f64) -> Result<()> {
        match self.layout.theta_a {
            Some(i) => {
                self.params[i] = v;
                Ok(())
            }
            None => Err(Error::WrongVariant("linear action has no bias".into())),
        }
    }

    /// Flat index of `W^s[i][j][k][l]` (third / full order).
    pub fn ws_index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        let (ns, nr, ni) = (self.shape.n_state, self.shape.n_read, self.shape.n_input);
        debug_assert!(self.order != Order::Second);
        ((i * ns + j) * nr + k) * ni + l
    }

    /// Flat index of `W^s[i][j][k]` over the concatenated axis (second order).
    pub fn ws2_index(&self, i: usize, j: usize, k: usize) -> usize {
        let (ns, c) = (self.shape.n_state, self.shape.n_read + self.shape.n_input);
        (i * ns + j) * c + k
    }

    /// Index into the action tensor: `[j][k][l]`, `[j][k]` or `[J][k][l]`.
    pub fn wa_index(&self, j: usize, k: usize, l: usize) -> usize {
        match self.order {
            Order::Second => j * (self.shape.n_read + self.shape.n_input) + k,
            _ => (j * self.shape.n_read + k) * self.shape.n_input + l,
        }
    }

    /// Clamps the linear full-order action tensor to `[-1, 1]`.
    pub fn truncate_action_weights(&mut self) {
        if self.action_activation == ActionActivation::Linear {
            for w in self.w_action_mut() {
                *w = w.clamp(-1.0, 1.0);
            }
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.params.iter().all(|p| p.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite("weights".into()))
        }
    }

    fn check_dims(&self, s: &[f64], r: &[f64], input: &[f64]) -> Result<()> {
        let sh = &self.shape;
        if s.len() != sh.n_state || r.len() != sh.n_read || input.len() != sh.n_input {
            return Err(Error::Dimension(format!(
                "got S={}, R={}, I={} for shape {}",
                s.len(),
                r.len(),
                input.len(),
                sh
            )));
        }
        Ok(())
    }

    /// One controller step.
    pub fn step(&self, state: &NetworkState) -> Result<StepOutput> {
        self.step_parts(&state.s, &state.r, &state.input)
    }

    pub fn step_parts(&self, s: &[f64], r: &[f64], input: &[f64]) -> Result<StepOutput> {
        self.check_dims(s, r, input)?;
        Ok(self.step_unchecked(s, r, input))
    }

    pub(crate) fn step_unchecked(&self, s: &[f64], r: &[f64], input: &[f64]) -> StepOutput {
        let ns = self.shape.n_state;
        let theta = self.theta_s();
        let mut state = vec![0.0; ns];
        let context;
        let c: &[f64] = match self.order {
            Order::Second => {
                context = concat(r, input);
                &context
            }
            _ => r,
        };
        for (i, out) in state.iter_mut().enumerate() {
            *out = sigmoid(self.state_net(i, s, c, input) + theta[i]);
        }
        let action = self.action_net(s, c, input);
        StepOutput { state, action }
    }

    /// `sum_{jkl} W_ijkl S_j R_k I_l` (or the second-order analogue over `c`).
    pub(crate) fn state_net(&self, i: usize, s: &[f64], c: &[f64], input: &[f64]) -> f64 {
        let ns = self.shape.n_state;
        let w = self.w_state();
        match self.order {
            Order::Second => {
                let cw = c.len();
                let mut net = 0.0;
                for (j, &sj) in s.iter().enumerate() {
                    let row = &w[(i * ns + j) * cw..(i * ns + j + 1) * cw];
                    net += sj * dot(row, c);
                }
                net
            }
            _ => {
                let (nr, ni) = (self.shape.n_read, self.shape.n_input);
                let mut net = 0.0;
                for (j, &sj) in s.iter().enumerate() {
                    let base = (i * ns + j) * nr * ni;
                    net += sj * bilinear(&w[base..base + nr * ni], c, input);
                }
                net
            }
        }
    }

    fn action_net(&self, s: &[f64], c: &[f64], input: &[f64]) -> f64 {
        let wa = self.w_action();
        let raw = match self.order {
            Order::Second => {
                let cw = c.len();
                s.iter()
                    .enumerate()
                    .map(|(j, &sj)| sj * dot(&wa[j * cw..(j + 1) * cw], c))
                    .sum::<f64>()
            }
            Order::Third => {
                let block = self.shape.n_read * self.shape.n_input;
                s.iter()
                    .enumerate()
                    .map(|(j, &sj)| sj * bilinear(&wa[j * block..(j + 1) * block], c, input))
                    .sum::<f64>()
            }
            Order::FullOrderAction => {
                let block = self.shape.n_read * self.shape.n_input;
                let p = extended_state_unchecked(s);
                p.iter()
                    .enumerate()
                    .map(|(jj, &pj)| pj * bilinear(&wa[jj * block..(jj + 1) * block], c, input))
                    .sum::<f64>()
            }
        };
        match self.action_activation {
            ActionActivation::Sigmoid2 => 2.0 * sigmoid(raw + self.theta_a().unwrap_or(0.0)) - 1.0,
            ActionActivation::Linear => raw,
        }
    }
}

pub(crate) fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `sum_{kl} w[k][l] r_k i_l`, skipping zero factors.
#[inline]
pub(crate) fn bilinear(w: &[f64], r: &[f64], input: &[f64]) -> f64 {
    let ni = input.len();
    let mut acc = 0.0;
    for (k, &rk) in r.iter().enumerate() {
        if rk == 0.0 {
            continue;
        }
        let row = &w[k * ni..(k + 1) * ni];
        let mut inner = 0.0;
        for (l, &il) in input.iter().enumerate() {
            if il != 0.0 {
                inner += row[l] * il;
            }
        }
        acc += rk * inner;
    }
    acc
}

/// Soft indicators of the `2^N` binary corners of the state cube.
/// Bit `m` (least significant first) of `J` selects `s_m` or `1 - s_m`.
pub fn extended_state(s: &[f64]) -> Result<Vec<f64>> {
    const TOL: f64 = 1e-9;
    if s.len() > 16 {
        return Err(Error::Dimension(format!("{} state neurons", s.len())));
    }
    for &x in s {
        if !(-TOL..=1.0 + TOL).contains(&x) {
            return Err(Error::OutOfRange(format!(
                "state component {x} outside [0, 1]"
            )));
        }
    }
    Ok(extended_state_unchecked(s))
}

pub(crate) fn extended_state_unchecked(s: &[f64]) -> Vec<f64> {
    let n = 1usize << s.len();
    (0..n)
        .map(|jj| {
            s.iter()
                .enumerate()
                .map(|(m, &sm)| if (jj >> m) & 1 == 1 { sm } else { 1.0 - sm })
                .product()
        })
        .collect()
}

/// `dP_J / dS_m` as a `[J][m]` row-major matrix, computed with leave-one-out
/// products so saturated components are handled exactly.
pub fn extended_state_jacobian(s: &[f64]) -> Vec<f64> {
    let ns = s.len();
    let n = 1usize << ns;
    let mut out = vec![0.0; n * ns];
    let mut factors = vec![0.0; ns];
    for jj in 0..n {
        for (m, f) in factors.iter_mut().enumerate() {
            *f = if (jj >> m) & 1 == 1 { s[m] } else { 1.0 - s[m] };
        }
        for m in 0..ns {
            let mut prod = if (jj >> m) & 1 == 1 { 1.0 } else { -1.0 };
            for (n2, &f) in factors.iter().enumerate() {
                if n2 != m {
                    prod *= f;
                }
            }
            out[jj * ns + m] = prod;
        }
    }
    out
}
