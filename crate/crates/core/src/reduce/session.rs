use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use super::{PropertyTest, ReductionMetrics, ReductionResult, SearchConfig};
use crate::gen::{
    aligned_reexecution_capped, AlignmentStrategy, GeneratedInput, Generator, MisalignmentAction,
    MismatchKind, ReexecOutcome,
};
use crate::trace::{digest_hex, NodeId, ReducedTrace, RemovalLabeling, TraceTree};

/// The search was stopped by its deadline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timeout;

#[derive(Debug, Clone)]
pub struct Candidate {
    pub holds: bool,
    /// Labeling actually realized; larger than requested after bypasses.
    pub effective: RemovalLabeling,
    pub input: Option<GeneratedInput>,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Counters {
    pub candidates: u64,
    pub completed: u64,
    pub valid_completed: u64,
    pub halted: u64,
    pub generator_errors: u64,
    pub prog_mismatches: u64,
    pub dec_mismatches: u64,
    pub bypassed_units: u64,
    pub realigned_values: u64,
}

/// State of one reduction: the recorded trace, the best labeling so far,
/// caches and counters.
pub struct Session<'a> {
    gen: &'a dyn Generator,
    tree: Arc<TraceTree>,
    property: &'a PropertyTest,
    config: SearchConfig,
    validity: Option<fn(&str) -> bool>,
    original: GeneratedInput,
    current: RemovalLabeling,
    current_input: GeneratedInput,
    accepted: Vec<RemovalLabeling>,
    label_cache: HashMap<RemovalLabeling, Candidate>,
    input_cache: HashMap<String, bool>,
    counters: Counters,
    history: Vec<(String, bool)>,
    started: Instant,
    deadline: Option<Instant>,
    timed_out: bool,
}

pub fn labeling_digest(labeling: &RemovalLabeling) -> String {
    let ids: Vec<String> = labeling.removed.iter().map(|id| id.0.to_string()).collect();
    digest_hex(ids.join(",").as_bytes())
}

impl<'a> Session<'a> {
    /// `original` must be the recorded output of `tree`'s trace and must
    /// satisfy the property.
    pub fn new(
        gen: &'a dyn Generator,
        tree: Arc<TraceTree>,
        original: GeneratedInput,
        property: &'a PropertyTest,
        config: SearchConfig,
        validity: Option<fn(&str) -> bool>,
    ) -> Self {
        let started = Instant::now();
        let mut input_cache = HashMap::new();
        input_cache.insert(original.text.clone(), true);
        Session {
            gen,
            tree,
            property,
            deadline: config.timeout.map(|t| started + t),
            config,
            validity,
            current: RemovalLabeling::empty(),
            current_input: original.clone(),
            original,
            accepted: vec![RemovalLabeling::empty()],
            label_cache: HashMap::new(),
            input_cache,
            counters: Counters::default(),
            history: Vec::new(),
            started,
            timed_out: false,
        }
    }

    pub fn tree(&self) -> &Arc<TraceTree> {
        &self.tree
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn current(&self) -> &RemovalLabeling {
        &self.current
    }

    pub fn current_input(&self) -> &GeneratedInput {
        &self.current_input
    }

    pub fn original(&self) -> &GeneratedInput {
        &self.original
    }

    pub(crate) fn mark_timed_out(&mut self) {
        self.timed_out = true;
    }

    fn property_holds(&mut self, input: &GeneratedInput) -> bool {
        if self.config.cache_enabled {
            if let Some(&v) = self.input_cache.get(&input.text) {
                return v;
            }
        }
        let v = self.property.call(input);
        if self.config.cache_enabled {
            self.input_cache.insert(input.text.clone(), v);
        }
        v
    }

    /// Re-executes the generator against `labeling` and tests the result.
    /// A candidate holds when it completes, is no larger than the
    /// original, and satisfies the property.
    pub fn test_candidate(&mut self, labeling: &RemovalLabeling) -> Result<Candidate, Timeout> {
        let key = self.tree.normalize(labeling);
        if self.config.cache_enabled {
            if let Some(c) = self.label_cache.get(&key) {
                return Ok(c.clone());
            }
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out = true;
            return Err(Timeout);
        }
        self.counters.candidates += 1;
        let reduced = ReducedTrace::new(self.tree.clone(), key.clone());
        let outcome = aligned_reexecution_capped(
            self.gen,
            &reduced,
            self.config.strategy,
            self.config.realign_seed,
            self.config.max_bypass_cascade,
        );
        let candidate = match outcome {
            Err(_) => {
                self.counters.generator_errors += 1;
                Candidate {
                    holds: false,
                    effective: key.clone(),
                    input: None,
                }
            }
            Ok(outcome) => {
                for e in outcome.events() {
                    match e.kind {
                        MismatchKind::ProgMismatch => self.counters.prog_mismatches += 1,
                        MismatchKind::DecMismatch => self.counters.dec_mismatches += 1,
                    }
                    match e.action {
                        MisalignmentAction::BypassedUnit(_) => self.counters.bypassed_units += 1,
                        MisalignmentAction::RealignedFreshValue => self.counters.realigned_values += 1,
                        MisalignmentAction::Halted => {}
                    }
                }
                match outcome {
                    ReexecOutcome::Halted { .. } => {
                        self.counters.halted += 1;
                        Candidate {
                            holds: false,
                            effective: key.clone(),
                            input: None,
                        }
                    }
                    ReexecOutcome::Completed {
                        input,
                        effective_labeling,
                        ..
                    } => {
                        self.counters.completed += 1;
                        if self.validity.is_none_or(|v| v(&input.text)) {
                            self.counters.valid_completed += 1;
                        }
                        let holds = input.size.total() <= self.original.size.total()
                            && self.property_holds(&input);
                        let effective = if self.config.strategy == AlignmentStrategy::Bypass {
                            self.tree.normalize(&effective_labeling)
                        } else {
                            key.clone()
                        };
                        Candidate {
                            holds,
                            effective,
                            input: Some(input),
                        }
                    }
                }
            }
        };
        self.history.push((labeling_digest(&key), candidate.holds));
        if self.config.cache_enabled {
            self.label_cache.insert(key, candidate.clone());
        }
        Ok(candidate)
    }

    /// Makes a holding candidate the new best.
    pub fn accept(&mut self, candidate: &Candidate) {
        assert!(candidate.holds, "only holding candidates are accepted");
        self.current = candidate.effective.clone();
        self.current_input = candidate.input.clone().expect("holding candidates completed");
        self.accepted.push(self.current.clone());
    }

    /// Units not yet removed by the current labeling, in document order.
    pub fn live_units(&self) -> Vec<NodeId> {
        let removed = self.tree.removed_nodes(&self.current).expect("session labelings are valid");
        self.tree
            .removable_units()
            .iter()
            .copied()
            .filter(|u| !removed.contains(u))
            .collect()
    }

    pub fn finish(self) -> ReductionResult {
        let c = self.counters;
        ReductionResult {
            metrics: ReductionMetrics {
                size_original: self.original.size,
                size_final: self.current_input.size,
                wall_time: self.started.elapsed().as_secs_f64(),
                property_tests: self.property.calls(),
                candidates: c.candidates,
                completed: c.completed,
                valid_completed: c.valid_completed,
                halted: c.halted,
                generator_errors: c.generator_errors,
                prog_mismatches: c.prog_mismatches,
                dec_mismatches: c.dec_mismatches,
                bypassed_units: c.bypassed_units,
                realigned_values: c.realigned_values,
                removable_units: self.tree.removable_units().len(),
                timed_out: self.timed_out,
            },
            final_input: self.current_input,
            final_labeling: self.current,
            original_input: self.original,
            accepted: self.accepted,
            history: self.history,
        }
    }
}
