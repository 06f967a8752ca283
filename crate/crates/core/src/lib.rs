//! Neural network pushdown automaton.
//!
//! A recurrent controller drives a continuous stack through a scalar action
//! and reads back the top unit window. Training uses forward-mode (RTRL)
//! sensitivities; a trained or constructed controller can be quantized back
//! into a discrete pushdown automaton.

#![allow(clippy::needless_range_loop)]

pub mod alphabet;
pub mod controller;
pub mod error;
pub mod extraction;
pub mod grammars;
pub mod stack;
pub mod training;

pub use alphabet::{decode_state_label, encode_input, Alphabet, NetworkShape, SymbolVector};
pub use controller::{
    construct_from_pda, extended_state, extended_state_jacobian, run_sequence, ActionActivation,
    ConstructOptions, NetworkState, Order, RunTrace, StepOutput, WeightSet,
};
pub use error::{Error, Result};
pub use extraction::{
    export_dot, extract_pda, quantize_action, quantize_action_weights, reduce_pda, run_pda,
    DiscretePda, ExtractOptions, PdaOutcome, QuantizationConfig, StackAction, StateQuantizer,
    StateScheme, TrapMode,
};
pub use grammars::{build_dataset, enumerate_strings, Grammar, Label, LabeledDataset};
pub use stack::{
    replay_trace, ActionKind, ActionOutcome, ContinuousStack, StackReading, StackSegment,
};
pub use training::{
    classify, error_unified, h_measure, train, train_string, ClassifyRule, Objective,
    PopEmptyPolicy, Sensitivities, TrainingConfig,
};
