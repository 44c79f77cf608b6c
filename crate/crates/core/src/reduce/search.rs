use std::collections::BTreeSet;

use super::ddmin::{ddmin, Interrupted, Verdict};
use super::session::{Session, Timeout};
use super::ReductionError;
use crate::trace::{NodeId, RemovalLabeling};

/// Most removable units the exhaustive search will enumerate.
pub const POWERSET_MAX_UNITS: usize = 20;

/// ddmin over `domain`, where removing an item adds it to the session's
/// labeling. Returns false if the search was interrupted.
fn ddmin_over(session: &mut Session<'_>, domain: Vec<NodeId>) -> bool {
    let all = domain.clone();
    let (_, interrupted) = ddmin(domain, |kept| {
        let kept_set: BTreeSet<NodeId> = kept.iter().copied().collect();
        let labeling = session
            .current()
            .with(all.iter().copied().filter(|u| !kept_set.contains(u)));
        let candidate = session.test_candidate(&labeling).map_err(|Timeout| Interrupted)?;
        if !candidate.holds {
            return Ok(Verdict::Fail);
        }
        session.accept(&candidate);
        let live: BTreeSet<NodeId> = session.live_units().into_iter().collect();
        Ok(Verdict::Pass(kept.iter().copied().filter(|u| live.contains(u)).collect()))
    });
    if interrupted {
        session.mark_timed_out();
    }
    !interrupted
}

/// ddmin over all removable units in document order.
pub fn ddmin_sequence(session: &mut Session<'_>) {
    let domain = session.live_units();
    ddmin_over(session, domain);
}

/// ddmin level by level, where the level of a unit is the number of
/// removable units on its path from the root. Sweeps all levels until a
/// sweep changes nothing.
pub fn hdd_tree(session: &mut Session<'_>) {
    let max_depth = session.tree().max_removable_depth();
    loop {
        let before = session.current().clone();
        for depth in 1..=max_depth {
            let domain: Vec<NodeId> = session
                .live_units()
                .into_iter()
                .filter(|&u| session.tree().node(u).removable_depth == depth)
                .collect();
            if domain.is_empty() {
                continue;
            }
            if !ddmin_over(session, domain) {
                return;
            }
        }
        if *session.current() == before {
            return;
        }
    }
}

/// Evaluates every labeling and keeps the smallest holding input. Ties go
/// to the labeling removing more units, then to the earlier one when
/// labelings are listed by descending removal count with units in document
/// order.
pub fn powerset_search(session: &mut Session<'_>) -> Result<(), ReductionError> {
    let units = session.tree().removable_units().to_vec();
    if units.len() > POWERSET_MAX_UNITS {
        return Err(ReductionError::OracleTooLarge {
            units: units.len(),
            max: POWERSET_MAX_UNITS,
        });
    }
    let n = units.len();
    let mut masks: Vec<u32> = (0..(1u32 << n)).collect();
    // Descending popcount; within a popcount, lexicographic on the listed
    // unit indices (bit 0 is the first unit).
    masks.sort_by_cached_key(|&m| {
        let idx: Vec<u32> = (0..n as u32).filter(|i| m & (1 << i) != 0).collect();
        (std::cmp::Reverse(m.count_ones()), idx)
    });
    let mut best: Option<(usize, super::session::Candidate)> = None;
    for mask in masks {
        let labeling: RemovalLabeling = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| units[i]).collect();
        let candidate = match session.test_candidate(&labeling) {
            Ok(c) => c,
            Err(Timeout) => break,
        };
        if !candidate.holds {
            continue;
        }
        let size = candidate.input.as_ref().expect("holding candidates completed").size.total();
        if best.as_ref().is_none_or(|(s, _)| size < *s) {
            best = Some((size, candidate));
        }
    }
    if let Some((_, candidate)) = best {
        session.accept(&candidate);
    }
    Ok(())
}

/// Tries removing each remaining unit on top of `labeling`. Returns the
/// first unit whose removal still holds, or `None` if `labeling` is
/// 1-minimal.
pub fn one_minimal_check(session: &mut Session<'_>, labeling: &RemovalLabeling) -> Result<Option<NodeId>, Timeout> {
    let removed = session
        .tree()
        .removed_nodes(labeling)
        .expect("labeling belongs to the session's tree");
    let units = session.tree().removable_units().to_vec();
    for u in units {
        if removed.contains(&u) {
            continue;
        }
        if session.test_candidate(&labeling.with([u]))?.holds {
            return Ok(Some(u));
        }
    }
    Ok(None)
}
