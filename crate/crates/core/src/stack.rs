//! Continuous stack: symbols carry analog lengths, a scalar action pushes or
//! pops fractional mass, and the controller sees the top window of depth one.

use std::fmt::Write as _;

use crate::alphabet::{Alphabet, SymbolVector};
use crate::error::{Error, Result};

/// Default no-op band for actions.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// A pop that lands within this distance of a segment boundary removes the
/// whole segment.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Depth of the read window.
pub const READ_DEPTH: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StackSegment {
    pub symbol: usize,
    pub length: f64,
}

/// Segments are stored bottom to top. `total_length` is maintained by the
/// action recursion rather than re-summed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContinuousStack {
    segments: Vec<StackSegment>,
    total_length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ActionKind {
    Push,
    Pop,
    NoOp,
    /// The pop exceeded the stored length by `deficit`; the stack was emptied.
    PopEmpty {
        deficit: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionOutcome {
    pub kind: ActionKind,
    /// Mass removed by a pop, top first.
    pub removed: Vec<StackSegment>,
}

impl ActionOutcome {
    pub fn deficit(&self) -> f64 {
        match self.kind {
            ActionKind::PopEmpty { deficit } => deficit,
            _ => 0.0,
        }
    }

    pub fn is_pop_empty(&self) -> bool {
        matches!(self.kind, ActionKind::PopEmpty { .. })
    }
}

/// What the controller sees of the stack.
#[derive(Clone, Debug, PartialEq)]
pub struct StackReading {
    /// Per-symbol mass inside the top window.
    pub vector: SymbolVector,
    /// Symbol of the topmost segment in the window.
    pub r1: Option<usize>,
    /// Symbol of the bottommost segment in the window.
    pub r2: Option<usize>,
    /// Number of segments intersecting the window.
    pub section_count: usize,
}

impl ContinuousStack {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a stack from bottom-to-top segments.
    pub fn from_segments(segments: &[(usize, f64)]) -> Result<Self> {
        let mut out = Vec::with_capacity(segments.len());
        let mut total = 0.0;
        for &(symbol, length) in segments {
            if !(length > 0.0 && length.is_finite()) {
                return Err(Error::OutOfRange(format!("segment length {length}")));
            }
            out.push(StackSegment { symbol, length });
            total += length;
        }
        Ok(ContinuousStack {
            segments: out,
            total_length: total,
        })
    }

    pub fn segments(&self) -> &[StackSegment] {
        &self.segments
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Applies one scalar action. Values above `epsilon` push `input_symbol`
    /// with that length, values below `-epsilon` pop that much mass from the
    /// top, anything else is a no-op.
    pub fn apply_action(
        &self,
        action: f64,
        input_symbol: usize,
        epsilon: f64,
    ) -> Result<(ContinuousStack, ActionOutcome)> {
        let mut next = self.clone();
        let outcome = next.apply_in_place(action, input_symbol, epsilon)?;
        Ok((next, outcome))
    }

    /// In-place variant of [`ContinuousStack::apply_action`].
    pub fn apply_in_place(
        &mut self,
        action: f64,
        input_symbol: usize,
        epsilon: f64,
    ) -> Result<ActionOutcome> {
        if !action.is_finite() || action.abs() > 1.0 {
            return Err(Error::OutOfRange(format!(
                "action {action} outside [-1, 1]"
            )));
        }
        if !(0.0..0.5).contains(&epsilon) {
            return Err(Error::OutOfRange(format!(
                "epsilon {epsilon} outside [0, 0.5)"
            )));
        }
        if action > epsilon {
            self.segments.push(StackSegment {
                symbol: input_symbol,
                length: action,
            });
            self.total_length += action;
            return Ok(ActionOutcome {
                kind: ActionKind::Push,
                removed: Vec::new(),
            });
        }
        if action >= -epsilon {
            return Ok(ActionOutcome {
                kind: ActionKind::NoOp,
                removed: Vec::new(),
            });
        }

        let mut remaining = -action;
        let mut removed = Vec::new();
        while remaining > BOUNDARY_TOLERANCE {
            let Some(top) = self.segments.last_mut() else {
                break;
            };
            if top.length <= remaining + BOUNDARY_TOLERANCE {
                remaining -= top.length;
                removed.push(*top);
                self.segments.pop();
            } else {
                top.length -= remaining;
                removed.push(StackSegment {
                    symbol: top.symbol,
                    length: remaining,
                });
                remaining = 0.0;
            }
        }

        let previous = self.total_length;
        let kind = if self.segments.is_empty() && remaining > BOUNDARY_TOLERANCE {
            self.total_length = 0.0;
            ActionKind::PopEmpty {
                deficit: -action - previous,
            }
        } else {
            self.total_length = previous + action;
            if self.segments.is_empty() {
                self.total_length = self.total_length.max(0.0);
            }
            ActionKind::Pop
        };
        Ok(ActionOutcome { kind, removed })
    }

    /// Reads the top window of depth one.
    pub fn read(&self, alphabet_size: usize) -> StackReading {
        let mut vector = vec![0.0; alphabet_size];
        let mut depth = READ_DEPTH;
        let mut r1 = None;
        let mut r2 = None;
        let mut section_count = 0;
        for seg in self.segments.iter().rev() {
            if depth <= 0.0 {
                break;
            }
            let take = seg.length.min(depth);
            vector[seg.symbol] += take;
            depth -= take;
            if r1.is_none() {
                r1 = Some(seg.symbol);
            }
            r2 = Some(seg.symbol);
            section_count += 1;
        }
        StackReading {
            vector: SymbolVector(vector),
            r1,
            r2,
            section_count,
        }
    }

    /// `sym:len,...` bottom to top with six decimals.
    pub fn render_segments(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for (i, seg) in self.segments.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}:{:.6}", alphabet.symbol(seg.symbol), seg.length);
        }
        out
    }
}

/// One row of a replayed trace.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub action: f64,
    pub input_symbol: usize,
    pub outcome: ActionOutcome,
    pub stack: ContinuousStack,
    pub reading: StackReading,
}

/// Folds `apply_action` and `read` over a recorded action sequence. Pop-empty
/// events are kept in the outcomes and do not stop the replay.
pub fn replay_trace(
    initial: &ContinuousStack,
    actions: &[(f64, usize)],
    alphabet_size: usize,
    epsilon: f64,
) -> Result<Vec<TraceStep>> {
    let mut stack = initial.clone();
    let mut out = Vec::with_capacity(actions.len());
    for &(action, input_symbol) in actions {
        let outcome = stack.apply_in_place(action, input_symbol, epsilon)?;
        out.push(TraceStep {
            action,
            input_symbol,
            outcome,
            reading: stack.read(alphabet_size),
            stack: stack.clone(),
        });
    }
    Ok(out)
}

/// Renders a replay as TSV: `step, input, action, segments`.
pub fn trace_tsv(steps: &[TraceStep], alphabet: &Alphabet) -> String {
    let mut out = String::from("step\tinput\taction\tsegments\n");
    for (i, s) in steps.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}\t{}\t{:.6}\t{}",
            i + 1,
            alphabet.symbol(s.input_symbol),
            s.action,
            s.stack.render_segments(alphabet)
        );
    }
    out
}
