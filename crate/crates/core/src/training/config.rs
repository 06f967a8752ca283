use std::fmt::Write as _;

use crate::alphabet::NetworkShape;
use crate::controller::{ActionActivation, Order};
use crate::error::{Error, Result};
use crate::grammars::Grammar;
use crate::stack::DEFAULT_EPSILON;

use super::{ClassifyRule, DEFAULT_POP_EMPTY_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Update after every string.
    Stochastic,
    /// Sum the updates over an epoch.
    Batch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// `(v + L - S)^2` with the label-dependent `v`.
    Unified,
    /// Separate state and length targets; strings that enter a dead prefix
    /// are driven to the trap state and dropped.
    TrapState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PopEmptyPolicy {
    /// Stop the string and raise the stack length.
    StopAndGrowStack,
    /// Illegal strings: stop and lower the stack length, reinforcing the
    /// rejection. Legal strings: stop and raise it.
    StopWithHint,
    /// Illegal strings: stop without a correction. Legal strings: stop and
    /// raise the stack length.
    IllegalOnlySkip,
    /// Keep going with the stack clamped to empty.
    Ignore,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingConfig {
    pub eta: f64,
    pub mode: Mode,
    pub epsilon: f64,
    pub objective: Objective,
    pub pop_empty_policy: PopEmptyPolicy,
    /// Pop-empty deficits below this are clamped and the string continues;
    /// at or above it the string is rejected and the policy applies.
    pub pop_empty_tolerance: f64,
    pub legal_rate_multiplier: f64,
    /// One legal string after every `interleave` illegal ones; 0 mixes freely.
    pub interleave: usize,
    /// Per-stage maximum string length; longer strings sit the stage out.
    pub length_schedule: Vec<usize>,
    /// Per-stage epoch counts; a single dataset uses `epochs` when empty.
    pub stage_epochs: Vec<usize>,
    pub epochs: usize,
    pub seed: u64,
    pub init_range: f64,
    pub shuffle: bool,
    pub classify: ClassifyRule,
    /// Needed by the trap-state objective.
    pub grammar: Option<Grammar>,
    pub order: Order,
    pub action_activation: ActionActivation,
    pub n_state: usize,
    pub empty_stack_neuron: bool,
    /// Stop a stage once every training string is classified correctly.
    pub stop_at_full_accuracy: bool,
    /// Stop a stage once the mean error falls to this value.
    pub target_error: Option<f64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            eta: 0.5,
            mode: Mode::Stochastic,
            epsilon: DEFAULT_EPSILON,
            objective: Objective::Unified,
            pop_empty_policy: PopEmptyPolicy::StopAndGrowStack,
            pop_empty_tolerance: DEFAULT_POP_EMPTY_TOLERANCE,
            legal_rate_multiplier: 5.0,
            interleave: 5,
            length_schedule: Vec::new(),
            stage_epochs: Vec::new(),
            epochs: 500,
            seed: 0,
            init_range: 1.0,
            shuffle: true,
            classify: ClassifyRule::HMeasure,
            grammar: None,
            order: Order::Second,
            action_activation: ActionActivation::Sigmoid2,
            n_state: 3,
            empty_stack_neuron: false,
            stop_at_full_accuracy: true,
            target_error: None,
        }
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Stochastic => "stochastic",
        Mode::Batch => "batch",
    }
}

fn objective_name(o: Objective) -> &'static str {
    match o {
        Objective::Unified => "unified",
        Objective::TrapState => "trap_state",
    }
}

fn policy_name(p: PopEmptyPolicy) -> &'static str {
    match p {
        PopEmptyPolicy::StopAndGrowStack => "stop_and_grow_stack",
        PopEmptyPolicy::StopWithHint => "stop_with_hint",
        PopEmptyPolicy::IllegalOnlySkip => "illegal_only_skip",
        PopEmptyPolicy::Ignore => "ignore",
    }
}

fn list(v: &[usize]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl TrainingConfig {
    /// Balanced parentheses: second order, three state neurons, pop-empty hint.
    pub fn paren(seed: u64) -> Self {
        TrainingConfig {
            grammar: Some(Grammar::Paren),
            pop_empty_policy: PopEmptyPolicy::StopWithHint,
            eta: 0.2,
            legal_rate_multiplier: 3.0,
            interleave: 0,
            epochs: 500,
            stop_at_full_accuracy: false,
            target_error: Some(0.002),
            seed,
            ..Default::default()
        }
    }

    /// `1^n 0^n`: second order, three state neurons, the same pop-empty hint
    /// and rates as the parenthesis preset, 300 epochs per round.
    pub fn anbn(seed: u64) -> Self {
        TrainingConfig {
            grammar: Some(Grammar::Anbn),
            pop_empty_policy: PopEmptyPolicy::StopWithHint,
            eta: 0.2,
            legal_rate_multiplier: 3.0,
            interleave: 0,
            epochs: 300,
            stop_at_full_accuracy: false,
            target_error: Some(0.002),
            seed,
            ..Default::default()
        }
    }

    /// Palindromes: full-order linear action with the empty-stack neuron,
    /// trap-state supervision, two stages of 200 epochs.
    pub fn palindrome(seed: u64) -> Self {
        TrainingConfig {
            grammar: Some(Grammar::Palindrome),
            objective: Objective::TrapState,
            order: Order::FullOrderAction,
            action_activation: ActionActivation::Linear,
            n_state: 4,
            empty_stack_neuron: true,
            classify: ClassifyRule::StateAndStack,
            pop_empty_policy: PopEmptyPolicy::StopAndGrowStack,
            legal_rate_multiplier: 5.0,
            interleave: 5,
            stage_epochs: vec![200, 200],
            stop_at_full_accuracy: false,
            target_error: None,
            seed,
            ..Default::default()
        }
    }

    pub fn shape(&self, n_input: usize) -> Result<NetworkShape> {
        NetworkShape::new(self.n_state, n_input, self.empty_stack_neuron)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if !(0.0..0.5).contains(&self.epsilon) {
            return Err(Error::Config(format!(
                "epsilon {} outside [0, 0.5)",
                self.epsilon
            )));
        }
        if self.length_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("length_schedule must be increasing".into()));
        }
        if self.pop_empty_tolerance.is_nan() || self.pop_empty_tolerance < 0.0 {
            return Err(Error::Config(
                "pop_empty_tolerance must be non-negative".into(),
            ));
        }
        if self.legal_rate_multiplier <= 0.0 {
            return Err(Error::Config(
                "legal_rate_multiplier must be positive".into(),
            ));
        }
        if self.objective == Objective::TrapState && self.grammar.is_none() {
            return Err(Error::Config("trap_state objective needs `grammar`".into()));
        }
        if self.action_activation == ActionActivation::Linear
            && self.order != Order::FullOrderAction
        {
            return Err(Error::Config("linear action requires order = full".into()));
        }
        Ok(())
    }

    /// Flat `key = value` text; lists are comma separated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("eta", self.eta.to_string());
        kv("mode", mode_name(self.mode).into());
        kv("epsilon", self.epsilon.to_string());
        kv("objective", objective_name(self.objective).into());
        kv(
            "pop_empty_policy",
            policy_name(self.pop_empty_policy).into(),
        );
        kv("pop_empty_tolerance", self.pop_empty_tolerance.to_string());
        kv(
            "legal_rate_multiplier",
            self.legal_rate_multiplier.to_string(),
        );
        kv("interleave", self.interleave.to_string());
        kv("length_schedule", list(&self.length_schedule));
        kv("stage_epochs", list(&self.stage_epochs));
        kv("epochs", self.epochs.to_string());
        kv("seed", self.seed.to_string());
        kv("init_range", self.init_range.to_string());
        kv("shuffle", self.shuffle.to_string());
        kv("classify", self.classify.name().into());
        kv("grammar", self.grammar.map_or("none", |g| g.name()).into());
        kv("order", self.order.name().into());
        kv("action", self.action_activation.name().into());
        kv("n_state", self.n_state.to_string());
        kv("empty_stack_neuron", self.empty_stack_neuron.to_string());
        kv(
            "stop_at_full_accuracy",
            self.stop_at_full_accuracy.to_string(),
        );
        kv(
            "target_error",
            self.target_error.map_or("none".into(), |e| e.to_string()),
        );
        out
    }

    /// Parses on top of the defaults. Unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = TrainingConfig::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", no + 1)))?;
            c.set(k.trim(), v.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    /// Sets one field from its text form.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        let bad = || Error::Config(format!("bad value `{v}` for `{key}`"));
        let f = || v.parse::<f64>().map_err(|_| bad());
        let u = || v.parse::<usize>().map_err(|_| bad());
        let b = || v.parse::<bool>().map_err(|_| bad());
        let ul = || -> Result<Vec<usize>> {
            if v.is_empty() {
                return Ok(Vec::new());
            }
            v.split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| bad()))
                .collect()
        };
        match key {
            "eta" => self.eta = f()?,
            "mode" => {
                self.mode = match v {
                    "stochastic" => Mode::Stochastic,
                    "batch" => Mode::Batch,
                    _ => return Err(bad()),
                }
            }
            "epsilon" => self.epsilon = f()?,
            "objective" => {
                self.objective = match v {
                    "unified" => Objective::Unified,
                    "trap_state" => Objective::TrapState,
                    _ => return Err(bad()),
                }
            }
            "pop_empty_policy" => {
                self.pop_empty_policy = match v {
                    "stop_and_grow_stack" => PopEmptyPolicy::StopAndGrowStack,
                    "stop_with_hint" => PopEmptyPolicy::StopWithHint,
                    "illegal_only_skip" => PopEmptyPolicy::IllegalOnlySkip,
                    "ignore" => PopEmptyPolicy::Ignore,
                    _ => return Err(bad()),
                }
            }
            "legal_rate_multiplier" => self.legal_rate_multiplier = f()?,
            "pop_empty_tolerance" => self.pop_empty_tolerance = f()?,
            "interleave" => self.interleave = u()?,
            "length_schedule" => self.length_schedule = ul()?,
            "stage_epochs" => self.stage_epochs = ul()?,
            "epochs" => self.epochs = u()?,
            "seed" => self.seed = v.parse().map_err(|_| bad())?,
            "init_range" => self.init_range = f()?,
            "shuffle" => self.shuffle = b()?,
            "classify" => self.classify = ClassifyRule::from_name(v).ok_or_else(bad)?,
            "grammar" => {
                self.grammar = if v == "none" {
                    None
                } else {
                    Some(Grammar::from_name(v).map_err(|_| bad())?)
                }
            }
            "order" => self.order = Order::from_name(v).map_err(|_| bad())?,
            "action" => {
                self.action_activation = ActionActivation::from_name(v).map_err(|_| bad())?
            }
            "n_state" => self.n_state = u()?,
            "empty_stack_neuron" => self.empty_stack_neuron = b()?,
            "stop_at_full_accuracy" => self.stop_at_full_accuracy = b()?,
            "target_error" => self.target_error = if v == "none" { None } else { Some(f()?) },
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        for c in [
            TrainingConfig::paren(3),
            TrainingConfig::anbn(1),
            TrainingConfig::palindrome(9),
        ] {
            assert_eq!(TrainingConfig::parse(&c.to_text()).unwrap(), c);
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let err = TrainingConfig::parse("eta = 0.1\nlearning_rate = 2\n").unwrap_err();
        assert!(err.to_string().contains("learning_rate"));
    }

    #[test]
    fn invariants() {
        assert!(TrainingConfig::parse("eta = 0").is_err());
        assert!(TrainingConfig::parse("length_schedule = 5,3").is_err());
        assert!(TrainingConfig::parse("objective = trap_state").is_err());
    }
}
