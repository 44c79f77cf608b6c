use std::panic::{catch_unwind, AssertUnwindSafe};

use crate::trace::{digest_hex, ChoiceDomain, ExecutionPath, ReducedTrace, Scalar, Trace};

use super::align::{AlignPlan, Aligner};
use super::context::GenContext;
use super::{
    AlignmentStrategy, GenError, GeneratedInput, Generator, MisalignmentAction, MisalignmentEvent,
    MismatchKind, ReexecOutcome,
};

/// Bypass restarts allowed within one re-execution before it is halted.
pub const DEFAULT_MAX_BYPASS_CASCADE: usize = 64;

/// The flat decision list of a trace, structure discarded.
pub type ChoiceSequence = Vec<(ChoiceDomain, Scalar)>;

fn run_guarded(gen: &dyn Generator, ctx: &mut GenContext<'_>) -> Result<GeneratedInput, GenError> {
    catch_unwind(AssertUnwindSafe(|| gen.generate(ctx))).map_err(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "non-string panic payload".to_string());
        GenError::Panicked(msg)
    })
}

/// Runs the generator on a plain PRNG without recording anything.
pub fn run_bare(gen: &dyn Generator, seed: u64) -> Result<GeneratedInput, GenError> {
    let mut ctx = GenContext::bare(seed);
    run_guarded(gen, &mut ctx)
}

/// Runs the generator from `seed`, recording every decision.
pub fn record_execution(gen: &dyn Generator, seed: u64) -> Result<(Trace, GeneratedInput), GenError> {
    let mut ctx = GenContext::record(seed);
    let input = run_guarded(gen, &mut ctx)?;
    if let Some(fault) = ctx.fault.take() {
        return Err(fault);
    }
    let trace = Trace {
        generator_id: gen.id().to_string(),
        seed,
        output_digest: digest_hex(input.text.as_bytes()),
        frames: std::mem::take(&mut ctx.frames),
        decisions: std::mem::take(&mut ctx.decisions),
    };
    Ok((trace, input))
}

/// Re-executes the generator so that its decisions follow the kept part of
/// a reduced trace.
pub fn aligned_reexecution(
    gen: &dyn Generator,
    reduced: &ReducedTrace,
    strategy: AlignmentStrategy,
    realign_seed: u64,
) -> Result<ReexecOutcome, GenError> {
    aligned_reexecution_capped(gen, reduced, strategy, realign_seed, DEFAULT_MAX_BYPASS_CASCADE)
}

/// As [`aligned_reexecution`], halting once more than `max_cascade` units
/// have been bypassed.
///
/// A bypass strikes the smallest removable unit enclosing the mismatching
/// recorded decision and re-runs the generator against the enlarged
/// labeling, so the result is exactly the aligned execution of that
/// labeling.
pub fn aligned_reexecution_capped(
    gen: &dyn Generator,
    reduced: &ReducedTrace,
    strategy: AlignmentStrategy,
    realign_seed: u64,
    max_cascade: usize,
) -> Result<ReexecOutcome, GenError> {
    let tree = &*reduced.tree;
    let mut labeling = reduced.labeling.clone();
    let mut events = Vec::new();
    let mut bypassed = 0usize;
    loop {
        let plan = AlignPlan::new(tree, &labeling)?;
        let mut ctx = GenContext::align(Aligner::new(plan, strategy), realign_seed);
        let input = run_guarded(gen, &mut ctx)?;
        if let Some(fault) = ctx.fault.take() {
            return Err(fault);
        }
        let al = ctx.finish_align().expect("align engine");
        events.extend(al.events);
        if al.halted {
            return Ok(ReexecOutcome::Halted { events });
        }
        if let Some(unit) = al.bypass {
            bypassed += 1;
            if bypassed > max_cascade {
                events.push(MisalignmentEvent {
                    at: ExecutionPath::root(),
                    kind: MismatchKind::ProgMismatch,
                    action: MisalignmentAction::Halted,
                });
                return Ok(ReexecOutcome::Halted { events });
            }
            labeling.removed.insert(unit);
            continue;
        }
        let trace = Trace {
            generator_id: gen.id().to_string(),
            seed: tree.trace().seed,
            output_digest: digest_hex(input.text.as_bytes()),
            frames: std::mem::take(&mut ctx.frames),
            decisions: std::mem::take(&mut ctx.decisions),
        };
        return Ok(ReexecOutcome::Completed {
            input,
            trace,
            effective_labeling: labeling,
            events,
        });
    }
}

/// Runs the generator answering its requests, in order, from `values`.
/// A value invalid for the live domain, or a request past the end, is
/// answered with a draw from a PRNG seeded by `fallback_seed`.
pub fn replay_choices(
    gen: &dyn Generator,
    values: &[Scalar],
    fallback_seed: u64,
) -> Result<GeneratedInput, GenError> {
    let mut ctx = GenContext::replay(values, fallback_seed);
    run_guarded(gen, &mut ctx)
}
