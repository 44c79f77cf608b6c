use std::sync::Arc;
use std::time::Duration;

use greduce::cases::{self, CaseSpec};
use greduce::gen::AlignmentStrategy;
use greduce::reduce::{
    greduce, one_minimal_check, PropertyTest, ReductionError, SearchConfig, SearchKind, Session,
};
use greduce::trace::TraceTree;

fn reduce(c: &CaseSpec, seed: u64, config: SearchConfig) -> greduce::reduce::ReductionResult {
    let (_, original) = c.record(seed).unwrap();
    let p = PropertyTest::from_predicate(c.property_for(&original));
    greduce(&*c.generator, seed, &p, config, Some(c.validity)).unwrap()
}

#[test]
fn password_reduces_under_every_configuration() {
    let c = cases::password::case();
    for search in SearchKind::ALL {
        for strategy in AlignmentStrategy::ALL {
            let r = reduce(&c, c.fixture_seed, SearchConfig::new(search, strategy));
            assert_eq!(r.final_input.text, "c\nc\n", "{search} {strategy:?}");
            assert_eq!(r.metrics.size_final.total(), 4);
        }
    }
}

#[test]
fn searches_are_one_minimal_and_no_better_than_powerset() {
    for c in cases::case_registry() {
        let (trace, original) = c.record(c.fixture_seed).unwrap();
        let tree = Arc::new(TraceTree::build(&trace).unwrap());
        assert!(tree.removable_units().len() <= 12, "{}", c.name);
        for strategy in AlignmentStrategy::ALL {
            let best = reduce(&c, c.fixture_seed, SearchConfig::new(SearchKind::Powerset, strategy));
            for search in [SearchKind::SequenceDdmin, SearchKind::TreeHdd] {
                let r = reduce(&c, c.fixture_seed, SearchConfig::new(search, strategy));
                assert!(r.metrics.size_final.total() >= best.metrics.size_final.total());
                let p = PropertyTest::from_predicate(c.property_for(&original));
                let mut session = Session::new(
                    &*c.generator,
                    tree.clone(),
                    original.clone(),
                    &p,
                    SearchConfig::new(search, strategy),
                    None,
                );
                assert_eq!(
                    one_minimal_check(&mut session, &r.final_labeling).unwrap(),
                    None,
                    "{} {search} {strategy:?}",
                    c.name
                );
            }
        }
    }
}

#[test]
fn accepted_inputs_never_grow() {
    for c in cases::case_registry() {
        for search in [SearchKind::SequenceDdmin, SearchKind::TreeHdd] {
            let r = reduce(&c, c.fixture_seed, SearchConfig::new(search, AlignmentStrategy::Realign));
            assert!(r.metrics.size_final.total() <= r.metrics.size_original.total());
            assert!(r.accepted.windows(2).all(|w| w[0] != w[1]));
            assert!((c.property_for(&r.original_input))(&r.final_input.text));
            assert_eq!(r.metrics.validity_rate(), 1.0, "{}", c.name);
        }
    }
}

#[test]
fn caching_changes_cost_not_result() {
    let c = cases::digraph::case();
    for strategy in AlignmentStrategy::ALL {
        let cached = reduce(&c, c.fixture_seed, SearchConfig::new(SearchKind::TreeHdd, strategy));
        let mut config = SearchConfig::new(SearchKind::TreeHdd, strategy);
        config.cache_enabled = false;
        let uncached = reduce(&c, c.fixture_seed, config);
        assert_eq!(cached.final_input, uncached.final_input);
        assert!(cached.metrics.candidates <= uncached.metrics.candidates);
        assert!(cached.metrics.property_tests <= uncached.metrics.property_tests);
    }
}

#[test]
fn property_counter_matches_report() {
    let c = cases::nested::case();
    let (_, original) = c.record(c.fixture_seed).unwrap();
    let p = PropertyTest::from_predicate(c.property_for(&original));
    let r = greduce(&*c.generator, c.fixture_seed, &p, SearchConfig::new(SearchKind::TreeHdd, AlignmentStrategy::Halt), None).unwrap();
    assert_eq!(r.metrics.property_tests, p.calls());
    assert_eq!(r.final_input.text, "[7]");
}

#[test]
fn zero_timeout_keeps_original() {
    let c = cases::digraph::case();
    let mut config = SearchConfig::new(SearchKind::SequenceDdmin, AlignmentStrategy::Realign);
    config.timeout = Some(Duration::ZERO);
    let r = reduce(&c, c.fixture_seed, config);
    assert!(r.metrics.timed_out);
    assert_eq!(r.final_input, r.original_input);
}

#[test]
fn missing_bug_and_oversized_oracle_are_errors() {
    let c = cases::password::case();
    let never = PropertyTest::new(|_| false);
    let config = SearchConfig::new(SearchKind::TreeHdd, AlignmentStrategy::Halt);
    assert_eq!(
        greduce(&*c.generator, 0, &never, config, None).unwrap_err(),
        ReductionError::PropertyNotExhibited
    );
    let d = cases::digraph::case();
    let seed = d.bug_seeds(0, 1, 21, 200)[0];
    let (_, original) = d.record(seed).unwrap();
    let p = PropertyTest::from_predicate(d.property_for(&original));
    let err = greduce(&*d.generator, seed, &p, SearchConfig::new(SearchKind::Powerset, AlignmentStrategy::Halt), None);
    assert!(matches!(err, Err(ReductionError::OracleTooLarge { .. })));
}

#[test]
fn realign_is_no_worse_on_dependency_bearing_fixtures() {
    for c in cases::case_registry().into_iter().filter(|c| c.dependency_bearing) {
        let size = |s| reduce(&c, c.fixture_seed, SearchConfig::new(SearchKind::TreeHdd, s)).metrics.size_final.total();
        assert!(size(AlignmentStrategy::Realign) <= size(AlignmentStrategy::Halt), "{}", c.name);
    }
}
