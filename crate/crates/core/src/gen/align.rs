//! Cursor and frame map used by aligned re-execution.

use crate::trace::{
    path_compare, Decision, ExecutionPath, NodeId, NodeKind, PathOrder, RemovalLabeling, Role, Site,
    TraceError, TraceTree,
};

use super::{AlignmentStrategy, MisalignmentAction, MisalignmentEvent, MismatchKind};

/// A reduced trace prepared for replay: which nodes are gone and which
/// decisions remain, in document order.
pub(crate) struct AlignPlan<'t> {
    tree: &'t TraceTree,
    removed_node: Vec<bool>,
    kept: Vec<usize>,
}

impl<'t> AlignPlan<'t> {
    pub fn new(tree: &'t TraceTree, labeling: &RemovalLabeling) -> Result<Self, TraceError> {
        let mut removed_node = vec![false; tree.len()];
        for id in tree.removed_nodes(labeling)? {
            removed_node[id.0 as usize] = true;
        }
        let closure = tree.removal_closure(labeling)?;
        let kept = (0..tree.trace().len())
            .filter(|i| !closure.contains(i))
            .collect();
        Ok(AlignPlan {
            tree,
            removed_node,
            kept,
        })
    }

    fn is_removed(&self, id: NodeId) -> bool {
        self.removed_node[id.0 as usize]
    }

    /// Recorded ordinals of the iterations of `loop_node` that survive.
    fn kept_ordinals(&self, loop_node: NodeId) -> Vec<u32> {
        self.tree
            .node(loop_node)
            .children
            .iter()
            .filter(|&&c| !self.is_removed(c))
            .map(|&c| match self.tree.node(c).kind {
                NodeKind::Iteration { ordinal } => ordinal,
                ref k => unreachable!("loop child {k:?}"),
            })
            .collect()
    }
}

/// Recorded counterpart of a live loop: its path and the ordinals of the
/// recorded iterations that live iterations 1, 2, ... map onto.
pub(crate) struct LoopMap {
    pub path: ExecutionPath,
    pub ordinals: Vec<u32>,
}

pub(crate) enum LoopServe {
    Count(u32, Option<LoopMap>),
    Fresh(Option<LoopMap>),
    Drain,
}

pub(crate) enum BoolServe {
    Value(bool, Option<ExecutionPath>),
    Fresh,
    Drain,
}

pub(crate) enum ValueServe<'t> {
    Replay(&'t Decision),
    Fresh,
    Drain,
}

pub(crate) struct Aligner<'t> {
    plan: AlignPlan<'t>,
    strategy: AlignmentStrategy,
    next: usize,
    /// Recorded path of each live frame; `None` for frames with no
    /// recorded counterpart.
    frames: Vec<Option<ExecutionPath>>,
    pub events: Vec<MisalignmentEvent>,
    pub halted: bool,
    pub bypass: Option<NodeId>,
}

impl<'t> Aligner<'t> {
    pub fn new(plan: AlignPlan<'t>, strategy: AlignmentStrategy) -> Self {
        Aligner {
            plan,
            strategy,
            next: 0,
            frames: vec![Some(ExecutionPath::root())],
            events: Vec::new(),
            halted: false,
            bypass: None,
        }
    }

    pub fn push_frame(&mut self, recorded: Option<ExecutionPath>) {
        self.frames.push(recorded);
    }

    pub fn pop_frame(&mut self) {
        self.frames.pop();
    }

    fn cursor(&self) -> Option<&'t Decision> {
        let tree = self.plan.tree;
        self.plan.kept.get(self.next).map(|&i| &tree.trace().decisions[i])
    }

    /// Maps a live request onto recorded coordinates and returns the kept
    /// decision it corresponds to, if the cursor is sitting on it.
    fn locate(&mut self, site: &Site, occurrence: u32, role: Role) -> Option<&'t Decision> {
        let mapped = self
            .frames
            .last()
            .expect("root frame")
            .as_ref()
            .map(|p| p.child(*site, occurrence));
        if self.strategy == AlignmentStrategy::Realign {
            if let Some(m) = &mapped {
                while let Some(d) = self.cursor() {
                    if path_compare(self.plan.tree.decision_path(d.index), m) != PathOrder::Before {
                        break;
                    }
                    self.next += 1;
                }
            }
        }
        match (&mapped, self.cursor()) {
            (Some(m), Some(d)) if self.plan.tree.decision_path(d.index) == m && d.role == role => Some(d),
            _ => None,
        }
    }

    /// Applies the strategy to a mismatch. Returns true when a fresh value
    /// should be served (re-align), false when the execution must drain.
    fn mismatch(&mut self, kind: MismatchKind, at: ExecutionPath) -> bool {
        let action = match self.strategy {
            AlignmentStrategy::Halt => MisalignmentAction::Halted,
            AlignmentStrategy::Realign => MisalignmentAction::RealignedFreshValue,
            AlignmentStrategy::Bypass => {
                let unit = self
                    .cursor()
                    .and_then(|d| self.plan.tree.enclosing_unit(d.index));
                match unit {
                    Some(u) => MisalignmentAction::BypassedUnit(u),
                    None => MisalignmentAction::Halted,
                }
            }
        };
        match action {
            MisalignmentAction::Halted => self.halted = true,
            MisalignmentAction::BypassedUnit(u) => self.bypass = Some(u),
            MisalignmentAction::RealignedFreshValue => {}
        }
        let fresh = action == MisalignmentAction::RealignedFreshValue;
        self.events.push(MisalignmentEvent { at, kind, action });
        fresh
    }

    pub fn plain(
        &mut self,
        site: &Site,
        occurrence: u32,
        at: impl FnOnce() -> ExecutionPath,
        valid: impl FnOnce(&Decision) -> bool,
    ) -> ValueServe<'t> {
        let hit = self.locate(site, occurrence, Role::Plain);
        let kind = match hit {
            Some(d) if valid(d) => {
                self.next += 1;
                return ValueServe::Replay(d);
            }
            Some(_) => MismatchKind::DecMismatch,
            None => MismatchKind::ProgMismatch,
        };
        if self.mismatch(kind, at()) {
            ValueServe::Fresh
        } else {
            ValueServe::Drain
        }
    }

    pub fn loop_init(
        &mut self,
        site: &Site,
        occurrence: u32,
        max: u32,
        at: impl FnOnce() -> ExecutionPath,
    ) -> LoopServe {
        let hit = self.locate(site, occurrence, Role::LoopInit);
        let (kind, map) = match hit {
            Some(d) => {
                let ordinals = self.plan.kept_ordinals(self.plan.tree.owner_of(d.index));
                let map = LoopMap {
                    path: self.plan.tree.decision_path(d.index).clone(),
                    ordinals,
                };
                let k = map.ordinals.len() as u32;
                if k < max {
                    self.next += 1;
                    return LoopServe::Count(k, Some(map));
                }
                (MismatchKind::DecMismatch, Some(map))
            }
            None => (MismatchKind::ProgMismatch, None),
        };
        if self.mismatch(kind, at()) {
            LoopServe::Fresh(map)
        } else {
            LoopServe::Drain
        }
    }

    pub fn select_init(
        &mut self,
        site: &Site,
        occurrence: u32,
        at: impl FnOnce() -> ExecutionPath,
    ) -> BoolServe {
        let hit = self.locate(site, occurrence, Role::SelectInit);
        if let Some(d) = hit {
            self.next += 1;
            let sel = self.plan.tree.node(self.plan.tree.owner_of(d.index));
            return match sel.children.first() {
                Some(&block) if !self.plan.is_removed(block) => {
                    BoolServe::Value(true, Some(self.plan.tree.decision_path(d.index).child(*site, 1)))
                }
                _ => BoolServe::Value(false, None),
            };
        }
        if self.mismatch(MismatchKind::ProgMismatch, at()) {
            BoolServe::Fresh
        } else {
            BoolServe::Drain
        }
    }

    /// Called when the generator returns. Kept decisions that were never
    /// requested are a mismatch under halt and bypass.
    pub fn finish(&mut self) {
        if self.halted || self.bypass.is_some() || self.strategy == AlignmentStrategy::Realign {
            return;
        }
        if self.cursor().is_some() {
            self.mismatch(MismatchKind::ProgMismatch, ExecutionPath::root());
        }
    }
}
