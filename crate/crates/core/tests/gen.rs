use std::sync::Arc;

use greduce::cases::{self, password};
use greduce::gen::{
    aligned_reexecution, aligned_reexecution_capped, generator, record_execution, replay_choices, run_bare,
    AlignmentStrategy, GenContext, GenError, GeneratedInput, MisalignmentAction, MismatchKind, ReexecOutcome,
};
use greduce::trace::{NodeKind, ReducedTrace, RemovalLabeling, Scalar, TraceTree};

fn reduced(trace: &greduce::trace::Trace, units: &[usize]) -> ReducedTrace {
    let tree = Arc::new(TraceTree::build(trace).unwrap());
    let labeling = units.iter().map(|&i| tree.removable_units()[i]).collect();
    ReducedTrace::new(tree, labeling)
}

#[test]
fn password_fixture_drops_two_iterations() {
    let gen = generator(password::ID, password::generate);
    let (trace, input) = record_execution(&gen, password::FIXTURE_SEED).unwrap();
    assert_eq!(input.text, "abc\nabc\n");
    let r = reduced(&trace, &[0, 1]);
    for strategy in AlignmentStrategy::ALL {
        let out = aligned_reexecution(&gen, &r, strategy, 0).unwrap();
        assert_eq!(out.input().unwrap().text, "c\nc\n", "{strategy:?}");
        assert!(out.events().is_empty());
    }
}

/// `x = [0]`, optionally push 1, optionally pick an element of `x`.
fn grow_pick(ctx: &mut GenContext<'_>) -> GeneratedInput {
    let mut x = vec![Scalar::Int(0)];
    ctx.maybe("grow", |_| x.push(Scalar::Int(1)));
    let options: Arc<[Scalar]> = x.into();
    let mut out = format!("{}", options.len());
    ctx.maybe("pick", |ctx| {
        let v = ctx.choose_from("pick.value", &options);
        out.push_str(&format!(" {}", v.as_int().unwrap()));
    });
    GeneratedInput::chars(out)
}

fn grow_pick_seed() -> u64 {
    let gen = generator("grow-pick", grow_pick);
    (0..1000)
        .find(|&s| run_bare(&gen, s).unwrap().text == "2 1")
        .expect("some seed grows and picks 1")
}

#[test]
fn dependent_choice_under_each_strategy() {
    let gen = generator("grow-pick", grow_pick);
    let (trace, input) = record_execution(&gen, grow_pick_seed()).unwrap();
    assert_eq!(input.text, "2 1");
    let tree = Arc::new(TraceTree::build(&trace).unwrap());
    let blocks = tree.removable_units().to_vec();
    assert_eq!(blocks.len(), 2);
    let r = ReducedTrace::new(tree.clone(), RemovalLabeling::from_iter([blocks[0]]));

    let halt = aligned_reexecution(&gen, &r, AlignmentStrategy::Halt, 0).unwrap();
    assert!(halt.is_halted());
    assert_eq!(halt.events()[0].kind, MismatchKind::DecMismatch);
    assert_eq!(halt.events()[0].action, MisalignmentAction::Halted);

    let bypass = aligned_reexecution(&gen, &r, AlignmentStrategy::Bypass, 0).unwrap();
    match &bypass {
        ReexecOutcome::Completed {
            input,
            effective_labeling,
            events,
            ..
        } => {
            assert_eq!(input.text, "1");
            assert!(effective_labeling.contains(blocks[1]));
            assert_eq!(events[0].action, MisalignmentAction::BypassedUnit(blocks[1]));
        }
        other => panic!("bypass halted: {other:?}"),
    }

    let realign = aligned_reexecution(&gen, &r, AlignmentStrategy::Realign, 0).unwrap();
    assert_eq!(realign.input().unwrap().text, "1 0");
    assert_eq!(realign.events()[0].action, MisalignmentAction::RealignedFreshValue);
}

#[test]
fn bypass_cascade_cap_halts() {
    let gen = generator("grow-pick", grow_pick);
    let (trace, _) = record_execution(&gen, grow_pick_seed()).unwrap();
    let r = reduced(&trace, &[0]);
    let out = aligned_reexecution_capped(&gen, &r, AlignmentStrategy::Bypass, 0, 0).unwrap();
    assert!(out.is_halted());
}

#[test]
fn reexecution_trace_matches_kept_decisions() {
    let c = cases::nested::case();
    let (trace, input) = c.record(c.fixture_seed).unwrap();
    assert_eq!(input.text, "[z7][33]");
    let tree = Arc::new(TraceTree::build(&trace).unwrap());
    let second_group = tree
        .removable_units()
        .iter()
        .copied()
        .find(|&u| matches!(tree.node(u).kind, NodeKind::Iteration { ordinal: 2 }) && tree.node(u).removable_depth == 1)
        .unwrap();
    let r = ReducedTrace::new(tree, RemovalLabeling::from_iter([second_group]));
    match aligned_reexecution(&*c.generator, &r, AlignmentStrategy::Halt, 0).unwrap() {
        ReexecOutcome::Completed { input, trace: t, .. } => {
            assert_eq!(input.text, "[z7]");
            let values: Vec<_> = t.decisions.iter().map(|d| d.value.clone()).collect();
            assert_eq!(
                values,
                vec![Scalar::Int(1), Scalar::Bool(true), Scalar::str("z"), Scalar::Int(1), Scalar::Int(7)]
            );
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn identity_and_bare_agree_with_recording() {
    for c in cases::all_cases() {
        for seed in 0..50 {
            let (trace, input) = c.record(seed).unwrap();
            assert_eq!(run_bare(&*c.generator, seed).unwrap(), input, "{} seed {seed}", c.name);
            let values: Vec<Scalar> = trace.decisions.iter().map(|d| d.value.clone()).collect();
            assert_eq!(replay_choices(&*c.generator, &values, 99).unwrap(), input);
            let identity = ReducedTrace::identity(Arc::new(TraceTree::build(&trace).unwrap()));
            for strategy in AlignmentStrategy::ALL {
                match aligned_reexecution(&*c.generator, &identity, strategy, 7).unwrap() {
                    ReexecOutcome::Completed { input: i, trace: t, events, .. } => {
                        assert_eq!(i, input);
                        assert!(events.is_empty());
                        assert_eq!(t.decisions, trace.decisions);
                    }
                    other => panic!("{other:?}"),
                }
            }
        }
    }
}

#[test]
fn recording_is_deterministic() {
    let c = cases::digraph::case();
    assert_eq!(c.record(5).unwrap(), c.record(5).unwrap());
}

#[test]
fn duplicate_site_is_reported() {
    let gen = generator("dup", |ctx: &mut GenContext<'_>| {
        let a = ctx.choose_int("x", 0, 3);
        let b = ctx.choose_int("x", 0, 3);
        GeneratedInput::chars(format!("{a}{b}"))
    });
    assert!(matches!(record_execution(&gen, 0), Err(GenError::DuplicateSite { .. })));

    let reused = generator("loop", |ctx: &mut GenContext<'_>| {
        let mut s = String::new();
        for _ in 0..3 {
            s.push_str(&ctx.choose_int("x", 0, 3).to_string());
        }
        GeneratedInput::chars(s)
    });
    assert!(record_execution(&reused, 0).is_ok());
}

#[test]
fn generator_panic_is_an_error() {
    let gen = generator("boom", |_: &mut GenContext<'_>| -> GeneratedInput { panic!("boom") });
    assert_eq!(record_execution(&gen, 0).unwrap_err(), GenError::Panicked("boom".into()));
}

#[test]
fn realign_fresh_values_depend_only_on_realign_seed() {
    let c = cases::digraph::case();
    let (trace, _) = c.record(c.fixture_seed).unwrap();
    let r = reduced(&trace, &[0]);
    let a = aligned_reexecution(&*c.generator, &r, AlignmentStrategy::Realign, 1).unwrap();
    let b = aligned_reexecution(&*c.generator, &r, AlignmentStrategy::Realign, 1).unwrap();
    assert_eq!(a.input(), b.input());
    assert!(!a.events().is_empty());
}
