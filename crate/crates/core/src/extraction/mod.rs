//! From analog controller to discrete pushdown automaton: quantization,
//! reachability search, state reduction and diagram export.

mod dot;
pub mod machines;
mod pda;
mod quantize;
mod reduce;
mod search;

pub use dot::export_dot;
pub use pda::{
    run_pda, CanonicalPda, DiscretePda, PdaOutcome, Reading, RuleKey, StackAction, Transition,
};
pub use quantize::{
    quantize_action, quantize_action_weights, QuantizationConfig, StateQuantizer, StateScheme,
    FIVE_LEVELS,
};
pub use reduce::reduce_pda;
pub use search::{extract_pda, ExtractOptions, TrapMode};
