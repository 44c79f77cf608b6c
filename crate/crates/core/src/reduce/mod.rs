//! Searches over removal labelings and the top-level reduction driver.

mod ddmin;
mod search;
mod session;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::gen::{
    record_execution, AlignmentStrategy, GenError, GeneratedInput, Generator, Size,
    DEFAULT_MAX_BYPASS_CASCADE,
};
use crate::trace::{RemovalLabeling, TraceError, TraceTree};

pub use ddmin::{ddmin, Interrupted, Verdict};
pub use search::{ddmin_sequence, hdd_tree, one_minimal_check, powerset_search, POWERSET_MAX_UNITS};
pub use session::{labeling_digest, Candidate, Session, Timeout};

/// A deterministic bug predicate together with a count of its genuine
/// invocations.
pub struct PropertyTest {
    f: Arc<dyn Fn(&str) -> bool + Send + Sync>,
    calls: AtomicU64,
}

impl PropertyTest {
    pub fn new(f: impl Fn(&str) -> bool + Send + Sync + 'static) -> Self {
        Self::from_predicate(Arc::new(f))
    }

    pub fn from_predicate(f: Arc<dyn Fn(&str) -> bool + Send + Sync>) -> Self {
        PropertyTest {
            f,
            calls: AtomicU64::new(0),
        }
    }

    pub fn call(&self, input: &GeneratedInput) -> bool {
        self.call_text(&input.text)
    }

    pub fn call_text(&self, text: &str) -> bool {
        self.calls.fetch_add(1, Ordering::Relaxed);
        (self.f)(text)
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl fmt::Debug for PropertyTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PropertyTest").field("calls", &self.calls()).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchKind {
    Powerset,
    SequenceDdmin,
    TreeHdd,
}

impl SearchKind {
    pub const ALL: [SearchKind; 3] = [SearchKind::Powerset, SearchKind::SequenceDdmin, SearchKind::TreeHdd];

    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            SearchKind::Powerset => "powerset",
            SearchKind::SequenceDdmin => "seq",
            SearchKind::TreeHdd => "tree",
        }
    }
}

impl fmt::Display for SearchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SearchKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "powerset" => Ok(SearchKind::Powerset),
            "seq" => Ok(SearchKind::SequenceDdmin),
            "tree" => Ok(SearchKind::TreeHdd),
            other => Err(format!("unknown search {other:?} (expected powerset, seq or tree)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub search: SearchKind,
    pub strategy: AlignmentStrategy,
    pub realign_seed: u64,
    pub timeout: Option<Duration>,
    pub max_bypass_cascade: usize,
    pub cache_enabled: bool,
}

impl SearchConfig {
    pub fn new(search: SearchKind, strategy: AlignmentStrategy) -> Self {
        SearchConfig {
            search,
            strategy,
            realign_seed: 0,
            timeout: None,
            max_bypass_cascade: DEFAULT_MAX_BYPASS_CASCADE,
            cache_enabled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionMetrics {
    pub size_original: Size,
    pub size_final: Size,
    /// Seconds.
    pub wall_time: f64,
    pub property_tests: u64,
    /// Candidates actually executed (cache hits excluded).
    pub candidates: u64,
    pub completed: u64,
    pub valid_completed: u64,
    pub halted: u64,
    pub generator_errors: u64,
    pub prog_mismatches: u64,
    pub dec_mismatches: u64,
    pub bypassed_units: u64,
    pub realigned_values: u64,
    pub removable_units: usize,
    pub timed_out: bool,
}

impl ReductionMetrics {
    /// Fraction of completed candidates that passed the validity checker
    /// (1 when none completed).
    pub fn validity_rate(&self) -> f64 {
        if self.completed == 0 {
            1.0
        } else {
            self.valid_completed as f64 / self.completed as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub final_input: GeneratedInput,
    pub final_labeling: RemovalLabeling,
    pub original_input: GeneratedInput,
    pub metrics: ReductionMetrics,
    /// Every accepted labeling, starting with the empty one.
    pub accepted: Vec<RemovalLabeling>,
    /// Digest and outcome of every executed candidate, in order.
    pub history: Vec<(String, bool)>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("the original input does not exhibit the property")]
    PropertyNotExhibited,
    #[error("{units} removable units exceed the exhaustive search limit of {max}")]
    OracleTooLarge { units: usize, max: usize },
    #[error(transparent)]
    Generator(#[from] GenError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Runs the configured search on an existing session.
pub fn run_search(session: &mut Session<'_>) -> Result<(), ReductionError> {
    match session.config().search {
        SearchKind::Powerset => powerset_search(session)?,
        SearchKind::SequenceDdmin => ddmin_sequence(session),
        SearchKind::TreeHdd => hdd_tree(session),
    }
    Ok(())
}

/// Records the generator at `seed`, checks that its input exhibits the
/// property, and reduces it with the configured search and strategy.
///
/// `validity`, when given, is applied to every completed candidate to
/// report the fraction of valid candidates.
pub fn greduce(
    gen: &dyn Generator,
    seed: u64,
    property: &PropertyTest,
    config: SearchConfig,
    validity: Option<fn(&str) -> bool>,
) -> Result<ReductionResult, ReductionError> {
    let (trace, original) = record_execution(gen, seed)?;
    if !property.call(&original) {
        return Err(ReductionError::PropertyNotExhibited);
    }
    let tree = Arc::new(TraceTree::build(&trace)?);
    let mut session = Session::new(gen, tree, original, property, config, validity);
    run_search(&mut session)?;
    Ok(session.finish())
}
