//! Campaigns: every (case, search, strategy, seed) cell reduced and
//! reported.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use greduce::cases::{self, CaseSpec};
use greduce::gen::AlignmentStrategy;
use greduce::reduce::{greduce, PropertyTest, SearchConfig, SearchKind};

use crate::report::ReductionReport;
use crate::CliError;

/// Smallest and largest trace size, in removable units, of the seeds
/// picked by [`SeedSpec::Bugs`].
pub const BUG_SEED_UNITS: (usize, usize) = (2, 12);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSpec {
    /// The case's fixture seed.
    Fixture,
    Value(u64),
    /// The first `n` seeds from 0 whose input exhibits the bug.
    Bugs(usize),
}

impl std::str::FromStr for SeedSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "fixture" {
            return Ok(SeedSpec::Fixture);
        }
        if let Some(n) = s.strip_prefix("bugs:") {
            return n.parse().map(SeedSpec::Bugs).map_err(|e| format!("bad seed count {n:?}: {e}"));
        }
        s.parse()
            .map(SeedSpec::Value)
            .map_err(|_| format!("bad seed {s:?} (expected an integer, fixture or bugs:N)"))
    }
}

impl SeedSpec {
    pub fn expand(self, case: &CaseSpec) -> Vec<u64> {
        match self {
            SeedSpec::Fixture => vec![case.fixture_seed],
            SeedSpec::Value(v) => vec![v],
            SeedSpec::Bugs(n) => case.bug_seeds(0, n, BUG_SEED_UNITS.0, BUG_SEED_UNITS.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    /// Case names; `all` selects every reducible case.
    pub cases: Vec<String>,
    pub searches: Vec<SearchKind>,
    pub strategies: Vec<AlignmentStrategy>,
    pub seeds: Vec<SeedSpec>,
    pub realign_seed: u64,
    pub timeout: Option<Duration>,
    /// Worker threads; cells are independent.
    pub jobs: usize,
}

impl CampaignConfig {
    pub fn new(cases: &[&str]) -> Self {
        CampaignConfig {
            cases: cases.iter().map(|s| s.to_string()).collect(),
            searches: vec![SearchKind::TreeHdd],
            strategies: vec![AlignmentStrategy::Realign],
            seeds: vec![SeedSpec::Fixture],
            realign_seed: 0,
            timeout: None,
            jobs: 1,
        }
    }

    fn resolve_cases(&self) -> Result<Vec<CaseSpec>, CliError> {
        if self.cases.is_empty() {
            return Err(CliError::Config("no cases given".into()));
        }
        let mut out: Vec<CaseSpec> = Vec::new();
        for name in &self.cases {
            if name == "all" {
                out.extend(cases::case_registry());
                continue;
            }
            let case = cases::find_case(name).ok_or_else(|| CliError::UnknownCase(name.clone()))?;
            if !case.reducible {
                return Err(CliError::Config(format!("case {name} is a demonstration and cannot be reduced")));
            }
            out.push(case);
        }
        Ok(out)
    }
}

struct Cell<'c> {
    case: &'c CaseSpec,
    search: SearchKind,
    strategy: AlignmentStrategy,
    seed: u64,
}

fn run_cell(cell: &Cell<'_>, config: &CampaignConfig) -> ReductionReport {
    let c = cell.case;
    let (search, strategy) = (cell.search.name(), cell.strategy.name());
    let fail = |e: String| ReductionReport::failed(c.name, search, strategy, cell.seed, config.realign_seed, e);
    let original = match c.record(cell.seed) {
        Ok((_, input)) => input,
        Err(e) => return fail(e.to_string()),
    };
    let predicate = c.property_for(&original);
    let property = PropertyTest::from_predicate(predicate.clone());
    let mut sc = SearchConfig::new(cell.search, cell.strategy);
    sc.realign_seed = config.realign_seed;
    sc.timeout = config.timeout;
    match greduce(&*c.generator, cell.seed, &property, sc, Some(c.validity)) {
        Ok(r) => ReductionReport::from_metrics(
            c.name,
            search,
            strategy,
            cell.seed,
            config.realign_seed,
            config.timeout.map(|t| t.as_secs_f64()),
            &r.metrics,
            &r.final_input.text,
            predicate(&r.final_input.text),
        ),
        Err(e) => fail(e.to_string()),
    }
}

/// Runs every cell of the campaign. Reports come back in cell order
/// (case, search, strategy, seed) whatever the number of jobs.
pub fn run_campaign(config: &CampaignConfig) -> Result<Vec<ReductionReport>, CliError> {
    let cases = config.resolve_cases()?;
    if config.searches.is_empty() || config.strategies.is_empty() || config.seeds.is_empty() {
        return Err(CliError::Config("searches, strategies and seeds must be non-empty".into()));
    }
    let seeds: Vec<Vec<u64>> = cases
        .iter()
        .map(|c| config.seeds.iter().flat_map(|s| s.expand(c)).collect())
        .collect();
    let mut cells = Vec::new();
    for (c, case_seeds) in cases.iter().zip(&seeds) {
        for &search in &config.searches {
            for &strategy in &config.strategies {
                for &seed in case_seeds {
                    cells.push(Cell {
                        case: c,
                        search,
                        strategy,
                        seed,
                    });
                }
            }
        }
    }
    let jobs = config.jobs.max(1).min(cells.len().max(1));
    if jobs == 1 {
        return Ok(cells.iter().map(|cell| run_cell(cell, config)).collect());
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<ReductionReport>>> = Mutex::new(vec![None; cells.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cell) = cells.get(i) else { break };
                let report = run_cell(cell, config);
                slots.lock().expect("no poisoned workers")[i] = Some(report);
            });
        }
    });
    Ok(slots
        .into_inner()
        .expect("no poisoned workers")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect())
}

/// Exit status for a finished campaign: 0 when every cell's final input
/// still exhibits its property, 3 otherwise.
pub fn campaign_exit_code(reports: &[ReductionReport]) -> i32 {
    if reports.iter().all(|r| r.sound && r.error.is_none()) {
        0
    } else {
        3
    }
}
