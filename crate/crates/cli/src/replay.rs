//! Re-executing a stored trace, optionally under a removal labeling.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use greduce::cases;
use greduce::gen::{aligned_reexecution, AlignmentStrategy, MisalignmentAction, MisalignmentEvent, MismatchKind, ReexecOutcome};
use greduce::trace::{deserialize_trace, ReducedTrace, RemovalLabeling, TraceTree};

use crate::CliError;

pub const LABELING_VERSION: &str = "greduce-labeling/1";

/// Removed units given by their 0-based position among the trace's
/// removable units in document order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingFile {
    pub version: String,
    pub removed: Vec<usize>,
}

impl LabelingFile {
    pub fn new(removed: Vec<usize>) -> Self {
        LabelingFile {
            version: LABELING_VERSION.to_string(),
            removed,
        }
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, CliError> {
        let file: LabelingFile = serde_json::from_slice(bytes).map_err(|e| CliError::Parse {
            what: "labeling",
            message: e.to_string(),
        })?;
        if file.version != LABELING_VERSION {
            return Err(CliError::Parse {
                what: "labeling",
                message: format!("unsupported version {:?}", file.version),
            });
        }
        Ok(file)
    }

    fn resolve(&self, tree: &TraceTree) -> Result<RemovalLabeling, CliError> {
        let units = tree.removable_units();
        self.removed
            .iter()
            .map(|&i| {
                units.get(i).copied().ok_or_else(|| CliError::Parse {
                    what: "labeling",
                    message: format!("unit {i} out of range (trace has {} removable units)", units.len()),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ReplayOutput {
    /// `None` when the re-execution halted.
    pub input: Option<String>,
    pub events: Vec<String>,
}

fn describe(event: &MisalignmentEvent, tree: &TraceTree) -> String {
    let kind = match event.kind {
        MismatchKind::ProgMismatch => "prog-mismatch",
        MismatchKind::DecMismatch => "dec-mismatch",
    };
    let action = match &event.action {
        MisalignmentAction::Halted => "halted".to_string(),
        MisalignmentAction::RealignedFreshValue => "fresh value".to_string(),
        MisalignmentAction::BypassedUnit(u) => match tree.unit_ordinal(*u) {
            Some(i) => format!("bypassed unit {i}"),
            None => format!("bypassed node {}", u.0),
        },
    };
    format!("{kind} at {}: {action}", event.at)
}

/// Re-executes the generator named in the trace file. Without a labeling
/// this reproduces the recorded input.
pub fn replay(
    trace_bytes: &[u8],
    labeling: Option<&LabelingFile>,
    strategy: AlignmentStrategy,
    realign_seed: u64,
) -> Result<ReplayOutput, CliError> {
    let trace = deserialize_trace(trace_bytes)?;
    let case = cases::find_generator(&trace.generator_id)
        .ok_or_else(|| CliError::UnknownGenerator(trace.generator_id.clone()))?;
    let tree = Arc::new(TraceTree::build(&trace)?);
    let labeling = match labeling {
        Some(l) => l.resolve(&tree)?,
        None => RemovalLabeling::empty(),
    };
    let reduced = ReducedTrace::new(tree.clone(), labeling);
    let outcome = aligned_reexecution(&*case.generator, &reduced, strategy, realign_seed)
        .map_err(|e| CliError::Generator(e.to_string()))?;
    let events = outcome.events().iter().map(|e| describe(e, &tree)).collect();
    Ok(ReplayOutput {
        input: match outcome {
            ReexecOutcome::Completed { input, .. } => Some(input.text),
            ReexecOutcome::Halted { .. } => None,
        },
        events,
    })
}
