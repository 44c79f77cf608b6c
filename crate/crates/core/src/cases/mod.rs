//! Bundled generators with injected bugs, validity checkers and bug
//! predicates.

pub mod digraph;
pub mod expr;
pub mod nested;
pub mod password;
pub mod pop;
mod similarity;

use std::sync::Arc;

use crate::baselines::Tokenizer;
use crate::gen::{
    aligned_reexecution, record_execution, AlignmentStrategy, GenError, GeneratedInput, Generator,
    Size,
};
use crate::prng::SplitMix64;
use crate::trace::{ReducedTrace, RemovalLabeling, Trace, TraceTree};

pub use similarity::{crash_oracle, similarity_ratio, SimilaritySpec};

/// A predicate over the text of an input.
pub type Predicate = Arc<dyn Fn(&str) -> bool + Send + Sync>;

pub struct CaseSpec {
    pub name: &'static str,
    pub summary: &'static str,
    pub generator: Arc<dyn Generator>,
    pub fixture_seed: u64,
    /// Builds the bug predicate for a reduction starting from `original`.
    /// Crash oracles compare against the original's message.
    pub property: fn(&GeneratedInput) -> Predicate,
    pub validity: fn(&str) -> bool,
    pub measure: fn(&str) -> Size,
    /// Whether decisions depend on earlier decisions, so that removals can
    /// make recorded values invalid.
    pub dependency_bearing: bool,
    /// Granularity for raw-input ddmin.
    pub tokenizer: Tokenizer,
    /// False for demonstration generators excluded from reduction runs.
    pub reducible: bool,
}

impl std::fmt::Debug for CaseSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CaseSpec").field("name", &self.name).finish_non_exhaustive()
    }
}

impl CaseSpec {
    pub fn property_for(&self, original: &GeneratedInput) -> Predicate {
        (self.property)(original)
    }

    pub fn record(&self, seed: u64) -> Result<(Trace, GeneratedInput), GenError> {
        record_execution(&*self.generator, seed)
    }

    /// The first `count` seeds, scanning upward from `start`, whose input
    /// exhibits the bug and whose trace has between `min_units` and
    /// `max_units` removable units.
    pub fn bug_seeds(&self, start: u64, count: usize, min_units: usize, max_units: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(count);
        let mut seed = start;
        while out.len() < count {
            if let Ok((trace, input)) = self.record(seed) {
                if self.property_for(&input)(&input.text) {
                    let units = TraceTree::build(&trace)
                        .map(|t| t.removable_units().len())
                        .unwrap_or(usize::MAX);
                    if (min_units..=max_units).contains(&units) {
                        out.push(seed);
                    }
                }
            }
            seed += 1;
        }
        out
    }
}

/// The reducible bundled cases.
pub fn case_registry() -> Vec<CaseSpec> {
    vec![password::case(), digraph::case(), expr::case(), nested::case()]
}

/// Every bundled case, including demonstrations that are not reduced.
pub fn all_cases() -> Vec<CaseSpec> {
    let mut cases = case_registry();
    cases.push(expr::unchecked_case());
    cases.push(pop::case());
    cases
}

pub fn find_case(name: &str) -> Option<CaseSpec> {
    all_cases().into_iter().find(|c| c.name == name)
}

/// Looks a case up by the generator id recorded in a trace.
pub fn find_generator(id: &str) -> Option<CaseSpec> {
    all_cases().into_iter().find(|c| c.generator.id() == id)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonicityViolation {
    pub smaller: RemovalLabeling,
    pub larger: RemovalLabeling,
    pub size_smaller_labeling: usize,
    pub size_larger_labeling: usize,
}

#[derive(Debug, Clone, Default)]
pub struct MonotonicityReport {
    pub trials: usize,
    pub completed_pairs: usize,
    pub violations: Vec<MonotonicityViolation>,
}

/// Re-executes the case's trace for `seed` under random labelings
/// `L1 ⊆ L2` and reports pairs where removing more produced a larger
/// input. Re-execution uses the halt strategy so that no fresh values
/// enter the comparison.
pub fn monotonicity_probe(case: &CaseSpec, seed: u64, trials: usize, probe_seed: u64) -> Result<MonotonicityReport, GenError> {
    let (trace, _) = case.record(seed)?;
    let tree = Arc::new(TraceTree::build(&trace)?);
    let units = tree.removable_units().to_vec();
    let mut rng = SplitMix64::new(probe_seed);
    let mut report = MonotonicityReport {
        trials,
        ..Default::default()
    };
    let size_under = |labeling: &RemovalLabeling| -> Result<Option<usize>, GenError> {
        let reduced = ReducedTrace::new(tree.clone(), labeling.clone());
        let outcome = aligned_reexecution(&*case.generator, &reduced, AlignmentStrategy::Halt, 0)?;
        Ok(outcome.input().map(|i| i.size.total()))
    };
    for _ in 0..trials {
        let larger: RemovalLabeling = units.iter().copied().filter(|_| rng.coin()).collect();
        let smaller: RemovalLabeling = larger.removed.iter().copied().filter(|_| rng.coin()).collect();
        if let (Some(s1), Some(s2)) = (size_under(&smaller)?, size_under(&larger)?) {
            report.completed_pairs += 1;
            if s2 > s1 {
                report.violations.push(MonotonicityViolation {
                    smaller,
                    larger,
                    size_smaller_labeling: s1,
                    size_larger_labeling: s2,
                });
            }
        }
    }
    Ok(report)
}
