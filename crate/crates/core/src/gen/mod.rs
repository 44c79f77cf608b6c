//! Generator combinators and the engines that execute generators.
//!
//! Generators draw all of their randomness through a [`GenContext`] using
//! four combinators: [`choose_int`](GenContext::choose_int),
//! [`choose_from`](GenContext::choose_from), [`repeat`](GenContext::repeat)
//! and [`maybe`](GenContext::maybe). The same generator code runs under
//! several engines:
//!
//! * bare: plain PRNG draws, nothing recorded (the overhead baseline);
//! * record: PRNG draws, every decision appended to a [`Trace`];
//! * align: decisions served from a reduced trace, with a
//!   [`AlignmentStrategy`] deciding what happens when the live execution
//!   stops matching the recording;
//! * replay: decisions served in order from a flat choice sequence.

mod align;
mod context;
mod exec;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::trace::{ExecutionPath, NodeId, RemovalLabeling, Trace, TraceError};

pub use context::GenContext;
pub use exec::{
    aligned_reexecution, aligned_reexecution_capped, record_execution, replay_choices, run_bare,
    ChoiceSequence, DEFAULT_MAX_BYPASS_CASCADE,
};

/// Size of a generated input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Size {
    Chars(usize),
    Graph { nodes: usize, edges: usize },
}

impl Size {
    /// Scalar size; graph sizes are summed.
    pub fn total(&self) -> usize {
        match *self {
            Size::Chars(n) => n,
            Size::Graph { nodes, edges } => nodes + edges,
        }
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Size::Chars(n) => write!(f, "{n}"),
            Size::Graph { nodes, edges } => write!(f, "({nodes},{edges})"),
        }
    }
}

/// The output of one generator execution in its canonical text form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneratedInput {
    pub text: String,
    pub size: Size,
}

impl GeneratedInput {
    pub fn chars(text: String) -> Self {
        let size = Size::Chars(text.chars().count());
        GeneratedInput { text, size }
    }

    pub fn digest(&self) -> String {
        crate::trace::digest_hex(self.text.as_bytes())
    }
}

/// A generator registered with the engine.
pub trait Generator: Send + Sync {
    fn id(&self) -> &str;
    fn generate(&self, ctx: &mut GenContext<'_>) -> GeneratedInput;
}

/// Adapts a closure into a [`Generator`].
pub struct FnGenerator<F> {
    id: String,
    f: F,
}

impl<F> Generator for FnGenerator<F>
where
    F: Fn(&mut GenContext<'_>) -> GeneratedInput + Send + Sync,
{
    fn id(&self) -> &str {
        &self.id
    }

    fn generate(&self, ctx: &mut GenContext<'_>) -> GeneratedInput {
        (self.f)(ctx)
    }
}

pub fn generator<F>(id: impl Into<String>, f: F) -> FnGenerator<F>
where
    F: Fn(&mut GenContext<'_>) -> GeneratedInput + Send + Sync,
{
    FnGenerator { id: id.into(), f }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum GenError {
    #[error("generator panicked: {0}")]
    Panicked(String),
    #[error("site {site:?} is issued from two locations in one frame ({first} and {second})")]
    DuplicateSite {
        site: String,
        first: String,
        second: String,
    },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentStrategy {
    Halt,
    Bypass,
    Realign,
}

impl AlignmentStrategy {
    pub const ALL: [AlignmentStrategy; 3] = [
        AlignmentStrategy::Halt,
        AlignmentStrategy::Bypass,
        AlignmentStrategy::Realign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlignmentStrategy::Halt => "halt",
            AlignmentStrategy::Bypass => "bypass",
            AlignmentStrategy::Realign => "realign",
        }
    }
}

impl fmt::Display for AlignmentStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AlignmentStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "halt" => Ok(AlignmentStrategy::Halt),
            "bypass" => Ok(AlignmentStrategy::Bypass),
            "realign" => Ok(AlignmentStrategy::Realign),
            other => Err(format!("unknown strategy {other:?} (expected halt, bypass or realign)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MismatchKind {
    /// The live request has no counterpart at the cursor.
    ProgMismatch,
    /// The counterpart exists but its value is invalid in the live domain.
    DecMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MisalignmentAction {
    Halted,
    BypassedUnit(NodeId),
    RealignedFreshValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MisalignmentEvent {
    /// Live execution path of the request (the root path when the
    /// mismatch is recorded decisions left over at the end).
    pub at: ExecutionPath,
    pub kind: MismatchKind,
    pub action: MisalignmentAction,
}

#[derive(Debug, Clone)]
pub enum ReexecOutcome {
    Completed {
        input: GeneratedInput,
        trace: Trace,
        effective_labeling: RemovalLabeling,
        events: Vec<MisalignmentEvent>,
    },
    Halted {
        events: Vec<MisalignmentEvent>,
    },
}

impl ReexecOutcome {
    pub fn events(&self) -> &[MisalignmentEvent] {
        match self {
            ReexecOutcome::Completed { events, .. } | ReexecOutcome::Halted { events } => events,
        }
    }

    pub fn input(&self) -> Option<&GeneratedInput> {
        match self {
            ReexecOutcome::Completed { input, .. } => Some(input),
            ReexecOutcome::Halted { .. } => None,
        }
    }

    pub fn is_halted(&self) -> bool {
        matches!(self, ReexecOutcome::Halted { .. })
    }
}
