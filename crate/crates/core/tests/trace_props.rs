use std::collections::BTreeSet;

use greduce::cases;
use greduce::trace::{deserialize_trace, serialize_trace, NodeKind, RemovalLabeling, Trace, TraceTree};
use proptest::prelude::*;

fn record(case: usize, seed: u64) -> Trace {
    let all = cases::all_cases();
    all[case % all.len()].record(seed).unwrap().0
}

fn pick(tree: &TraceTree, mask: u64) -> RemovalLabeling {
    tree.removable_units()
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> (i % 64) & 1 == 1)
        .map(|(_, &u)| u)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn serialization_round_trips(case in 0usize..16, seed in any::<u64>()) {
        let trace = record(case, seed);
        let bytes = serialize_trace(&trace);
        let back = deserialize_trace(&bytes).unwrap();
        prop_assert_eq!(&back, &trace);
        prop_assert_eq!(serialize_trace(&back), bytes);
    }

    #[test]
    fn tree_lists_decisions_in_order(case in 0usize..16, seed in any::<u64>()) {
        let trace = record(case, seed);
        let tree = TraceTree::build(&trace).unwrap();
        prop_assert_eq!(tree.in_order_decisions(), (0..trace.len()).collect::<Vec<_>>());
        for (i, d) in trace.decisions.iter().enumerate() {
            let owner = tree.owner_of(i);
            match tree.node(owner).kind {
                NodeKind::Leaf { decision } => prop_assert_eq!(decision, i),
                NodeKind::Loop { init, .. } | NodeKind::Selection { init, .. } => prop_assert_eq!(init, i),
                ref k => prop_assert!(false, "decision owned by {:?}", k),
            }
            prop_assert_eq!(&tree.node(owner).path, &trace.path(i));
            prop_assert_eq!(tree.decision_path(i), &trace.path(i));
            prop_assert_eq!(&trace.pathed(i).site, &d.site);
        }
    }

    #[test]
    fn units_are_in_document_order(case in 0usize..16, seed in any::<u64>()) {
        let tree = TraceTree::build(&record(case, seed)).unwrap();
        let preorder: Vec<_> = tree.preorder().into_iter().filter(|&n| tree.node(n).is_removable()).collect();
        prop_assert_eq!(tree.removable_units(), &preorder[..]);
        for w in tree.removable_units().windows(2) {
            prop_assert!(tree.node(w[0]).span.start <= tree.node(w[1]).span.start);
        }
    }

    #[test]
    fn closure_is_monotone(case in 0usize..16, seed in any::<u64>(), a in any::<u64>(), b in any::<u64>()) {
        let tree = TraceTree::build(&record(case, seed)).unwrap();
        let small = pick(&tree, a & b);
        let large = pick(&tree, a);
        prop_assert!(small.is_subset(&large));
        let cs = tree.removal_closure(&small).unwrap();
        let cl = tree.removal_closure(&large).unwrap();
        prop_assert!(cs.is_subset(&cl));
    }

    #[test]
    fn normalize_keeps_closure(case in 0usize..16, seed in any::<u64>(), mask in any::<u64>()) {
        let tree = TraceTree::build(&record(case, seed)).unwrap();
        let l = pick(&tree, mask);
        let n = tree.normalize(&l);
        prop_assert!(n.is_subset(&l));
        prop_assert_eq!(tree.normalize(&n), n.clone());
        prop_assert_eq!(tree.removal_closure(&n).unwrap(), tree.removal_closure(&l).unwrap());
    }

    #[test]
    fn closure_covers_unit_spans(case in 0usize..16, seed in any::<u64>(), mask in any::<u64>()) {
        let tree = TraceTree::build(&record(case, seed)).unwrap();
        let l = pick(&tree, mask);
        let expected: BTreeSet<usize> = l.removed.iter().flat_map(|&u| tree.node(u).span.clone()).collect();
        prop_assert_eq!(tree.removal_closure(&l).unwrap(), expected);
    }
}
