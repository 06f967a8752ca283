//! Objectives, classification rules, RTRL sensitivities and the training loop.

mod config;
mod rtrl;
mod trainer;

pub use config::{Mode, Objective, PopEmptyPolicy, TrainingConfig};
pub use rtrl::Sensitivities;
pub use trainer::{
    augment_with_errors, evaluate, frozen_reading_run, init_weights, train, train_string,
    EpochMetrics, Evaluation, FrozenRun, StringOutcome, TrainResult,
};

use crate::controller::RunTrace;
use crate::grammars::Label;

/// Default deficit at or above which a pop-empty event marks the string illegal.
pub const DEFAULT_POP_EMPTY_TOLERANCE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ClassifyRule {
    /// Legal iff `S_last - L > 0.5`.
    #[default]
    HMeasure,
    /// Legal iff `S_last > 0.5` and `L <= 0.5`.
    StateAndStack,
}

impl ClassifyRule {
    pub fn name(self) -> &'static str {
        match self {
            ClassifyRule::HMeasure => "h_measure",
            ClassifyRule::StateAndStack => "state_and_stack",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "h_measure" => Some(ClassifyRule::HMeasure),
            "state_and_stack" => Some(ClassifyRule::StateAndStack),
            _ => None,
        }
    }

    pub fn decide(self, s_last: f64, l: f64) -> Label {
        Label::from_bool(match self {
            ClassifyRule::HMeasure => h_measure(s_last, l) > 0.5,
            ClassifyRule::StateAndStack => s_last > 0.5 && l <= 0.5,
        })
    }
}

/// Combined final-state / empty-stack score.
pub fn h_measure(s_last: f64, l: f64) -> f64 {
    s_last - l
}

/// Squared error against the unified target. Legal strings aim at
/// `S - L = 1`; illegal strings get `v = min(0, S - L)`, so any outcome
/// with `S - L <= 0` costs nothing.
pub fn error_unified(s_last: f64, l: f64, label: Label) -> (f64, f64) {
    let v = match label {
        Label::Legal => 1.0,
        Label::Illegal => (s_last - l).min(0.0),
    };
    let e = v + l - s_last;
    (e * e, v)
}

/// Classifies an analog run: a pop-empty deficit of at least `tolerance`
/// rejects, otherwise the rule decides from the last state neuron and final
/// stack length.
pub fn classify(run: &RunTrace, rule: ClassifyRule, tolerance: f64) -> Label {
    if !run.pop_empty.is_empty() && run.max_deficit() >= tolerance {
        return Label::Illegal;
    }
    rule.decide(run.accept_neuron(), run.final_length())
}
