//! Hierarchical view of a trace and removal labelings over it.
//!
//! Reducible loops become `Loop` nodes whose children are one `Iteration`
//! per drawn iteration; reducible selections become `Selection` nodes with a
//! `Block` child when the guard was drawn true. Iterations and blocks are the
//! only removable units.

use std::collections::BTreeSet;
use std::ops::Range;
use std::sync::Arc;

use super::{ExecutionPath, Role, Scalar, Site, Trace, TraceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    fn ix(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Root,
    /// `init` is the index of the loop-count decision; `count` its value.
    Loop { init: usize, count: u32 },
    Iteration { ordinal: u32 },
    Selection { init: usize, taken: bool },
    Block,
    Leaf { decision: usize },
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Execution index of the node. Iterations and blocks extend the path
    /// of their loop or selection by one frame.
    pub path: ExecutionPath,
    /// Indices of the decisions beneath this node (contiguous).
    pub span: Range<usize>,
    /// Number of removable nodes on the path from the root to this node,
    /// counting the node itself.
    pub removable_depth: u32,
}

impl Node {
    pub fn is_removable(&self) -> bool {
        matches!(self.kind, NodeKind::Iteration { .. } | NodeKind::Block)
    }
}

#[derive(Debug, Clone)]
pub struct TraceTree {
    trace: Trace,
    nodes: Vec<Node>,
    units: Vec<NodeId>,
    /// Node directly owning each decision: its leaf, or the loop/selection
    /// it initializes.
    owner: Vec<NodeId>,
}

enum Open {
    Container {
        node: NodeId,
    },
    Loop {
        node: NodeId,
        site: Site,
        count: u32,
        next: u32,
    },
    Select {
        node: NodeId,
        site: Site,
        taken: bool,
        opened: bool,
    },
}

struct Builder {
    nodes: Vec<Node>,
    owner: Vec<NodeId>,
    stack: Vec<Open>,
}

impl Builder {
    fn add(&mut self, parent: NodeId, kind: NodeKind, path: ExecutionPath, start: usize) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        let parent_node = &self.nodes[parent.ix()];
        let removable = matches!(kind, NodeKind::Iteration { .. } | NodeKind::Block);
        let removable_depth = parent_node.removable_depth + u32::from(removable);
        self.nodes.push(Node {
            kind,
            parent: Some(parent),
            children: Vec::new(),
            path,
            span: start..start,
            removable_depth,
        });
        self.nodes[parent.ix()].children.push(id);
        id
    }

    fn top_node(&self) -> NodeId {
        match self.stack.last().expect("root is never closed") {
            Open::Container { node } | Open::Loop { node, .. } | Open::Select { node, .. } => *node,
        }
    }

    fn add_iteration(&mut self, loop_node: NodeId, site: &Site, ordinal: u32, at: usize) -> NodeId {
        let path = self.nodes[loop_node.ix()].path.child(*site, ordinal);
        self.add(loop_node, NodeKind::Iteration { ordinal }, path, at)
    }

    fn add_block(&mut self, sel: NodeId, site: &Site, at: usize) -> NodeId {
        let path = self.nodes[sel.ix()].path.child(*site, 1);
        self.add(sel, NodeKind::Block, path, at)
    }

    /// Closes the innermost open node at decision position `at`.
    fn close_top(&mut self, at: usize) {
        match self.stack.pop().expect("close below root") {
            Open::Container { node } => self.nodes[node.ix()].span.end = at,
            Open::Loop {
                node,
                site,
                count,
                next,
            } => {
                for ordinal in next..=count {
                    let it = self.add_iteration(node, &site, ordinal, at);
                    self.nodes[it.ix()].span.end = at;
                }
                self.nodes[node.ix()].span.end = at;
            }
            Open::Select {
                node,
                site,
                taken,
                opened,
            } => {
                if taken && !opened {
                    let b = self.add_block(node, &site, at);
                    self.nodes[b.ix()].span.end = at;
                }
                self.nodes[node.ix()].span.end = at;
            }
        }
    }
}

impl TraceTree {
    /// Rebuilds the loop/selection structure of a recorded trace from its
    /// execution paths and decision roles.
    pub fn build(trace: &Trace) -> Result<TraceTree, TraceError> {
        trace.validate()?;
        let mut b = Builder {
            nodes: vec![Node {
                kind: NodeKind::Root,
                parent: None,
                children: Vec::new(),
                path: ExecutionPath::root(),
                span: 0..trace.len(),
                removable_depth: 0,
            }],
            owner: Vec::with_capacity(trace.len()),
            stack: vec![Open::Container { node: NodeId(0) }],
        };

        let paths = trace.paths();
        for (d, path) in trace.decisions.iter().zip(paths) {
            let at = d.index;
            // Unwind to the innermost open node enclosing `d`, opening
            // iterations and blocks on the way down.
            loop {
                let top = b.top_node();
                let top_path = &b.nodes[top.ix()].path;
                let encloses = top_path.is_strict_prefix_of(&path);
                let depth = top_path.len();
                match b.stack.last_mut().unwrap() {
                    Open::Container { .. } => {
                        if encloses {
                            break;
                        }
                        b.close_top(at);
                    }
                    Open::Loop {
                        node,
                        site,
                        count,
                        next,
                    } => {
                        if !encloses {
                            b.close_top(at);
                            continue;
                        }
                        let f = &path.frames()[depth];
                        if f.site != *site || f.occurrence < *next || f.occurrence > *count {
                            return Err(TraceError::Malformed(format!(
                                "decision {at} at {:?} is not inside iteration 1..={} of loop {:?}",
                                path, count, site
                            )));
                        }
                        let (node, site, first, ordinal) = (*node, *site, *next, f.occurrence);
                        *next = ordinal + 1;
                        for empty in first..ordinal {
                            let it = b.add_iteration(node, &site, empty, at);
                            b.nodes[it.ix()].span.end = at;
                        }
                        let it = b.add_iteration(node, &site, ordinal, at);
                        b.stack.push(Open::Container { node: it });
                    }
                    Open::Select {
                        node,
                        site,
                        taken,
                        opened,
                    } => {
                        if !encloses {
                            b.close_top(at);
                            continue;
                        }
                        let f = &path.frames()[depth];
                        if !*taken || *opened || f.site != *site || f.occurrence != 1 {
                            return Err(TraceError::Malformed(format!(
                                "decision {at} at {:?} is not inside the block of selection {:?}",
                                path, site
                            )));
                        }
                        *opened = true;
                        let (node, site) = (*node, *site);
                        let blk = b.add_block(node, &site, at);
                        b.stack.push(Open::Container { node: blk });
                    }
                }
            }

            let parent = b.top_node();
            if path.len() != b.nodes[parent.ix()].path.len() + 1 {
                return Err(TraceError::Malformed(format!(
                    "decision {at} at {:?} skips a structural level below {:?}",
                    path,
                    b.nodes[parent.ix()].path
                )));
            }
            match d.role {
                Role::Plain => {
                    let leaf = b.add(parent, NodeKind::Leaf { decision: at }, path.clone(), at);
                    b.nodes[leaf.ix()].span.end = at + 1;
                    b.owner.push(leaf);
                }
                Role::LoopInit => {
                    let count = match d.value {
                        Scalar::Int(n) if n >= 0 && n <= u32::MAX as i64 => n as u32,
                        _ => {
                            return Err(TraceError::Malformed(format!(
                                "loop init {at} has value {:?}",
                                d.value
                            )))
                        }
                    };
                    let lp = b.add(parent, NodeKind::Loop { init: at, count }, path.clone(), at);
                    b.owner.push(lp);
                    b.stack.push(Open::Loop {
                        node: lp,
                        site: d.site,
                        count,
                        next: 1,
                    });
                }
                Role::SelectInit => {
                    let taken = d.value == Scalar::Bool(true);
                    let sel =
                        b.add(parent, NodeKind::Selection { init: at, taken }, path.clone(), at);
                    b.owner.push(sel);
                    b.stack.push(Open::Select {
                        node: sel,
                        site: d.site,
                        taken,
                        opened: false,
                    });
                }
            }
        }
        while b.stack.len() > 1 {
            b.close_top(trace.len());
        }

        let mut tree = TraceTree {
            trace: trace.clone(),
            nodes: b.nodes,
            units: Vec::new(),
            owner: b.owner,
        };
        tree.units = tree
            .preorder()
            .into_iter()
            .filter(|&id| tree.node(id).is_removable())
            .collect();
        Ok(tree)
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    /// Execution path of decision `i`.
    pub fn decision_path(&self, i: usize) -> &ExecutionPath {
        &self.node(self.owner[i]).path
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.ix()]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    /// All node ids in pre-order (document order).
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root()];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.node(id).children.iter().rev().copied());
        }
        out
    }

    /// Every iteration and block, in document order.
    pub fn removable_units(&self) -> &[NodeId] {
        &self.units
    }

    pub fn max_removable_depth(&self) -> u32 {
        self.units
            .iter()
            .map(|&u| self.node(u).removable_depth)
            .max()
            .unwrap_or(0)
    }

    /// Decision indices in tree traversal order: init decisions before
    /// their iterations or block, leaves in place.
    pub fn in_order_decisions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.trace.len());
        for id in self.preorder() {
            match self.node(id).kind {
                NodeKind::Leaf { decision }
                | NodeKind::Loop { init: decision, .. }
                | NodeKind::Selection { init: decision, .. } => out.push(decision),
                _ => {}
            }
        }
        out
    }

    /// The leaf or structural node a decision belongs to.
    pub fn owner_of(&self, decision: usize) -> NodeId {
        self.owner[decision]
    }

    /// Innermost iteration or block containing a decision, if any.
    pub fn enclosing_unit(&self, decision: usize) -> Option<NodeId> {
        let mut cur = self.node(self.owner[decision]).parent;
        while let Some(id) = cur {
            let n = self.node(id);
            if n.is_removable() {
                return Some(id);
            }
            cur = n.parent;
        }
        None
    }

    /// True when `ancestor` is `node` or lies above it.
    pub fn is_ancestor_or_self(&self, ancestor: NodeId, node: NodeId) -> bool {
        let mut cur = Some(node);
        while let Some(id) = cur {
            if id == ancestor {
                return true;
            }
            cur = self.node(id).parent;
        }
        false
    }

    fn check_label(&self, id: NodeId) -> Result<(), TraceError> {
        match self.nodes.get(id.ix()) {
            Some(n) if n.is_removable() => Ok(()),
            Some(n) => Err(TraceError::InvalidLabel(format!(
                "node {} is a {:?}, not an iteration or block",
                id.0, n.kind
            ))),
            None => Err(TraceError::InvalidLabel(format!(
                "node {} does not exist in this tree",
                id.0
            ))),
        }
    }

    /// Indices of all decisions beneath a labeled node.
    pub fn removal_closure(&self, labeling: &RemovalLabeling) -> Result<BTreeSet<usize>, TraceError> {
        let mut out = BTreeSet::new();
        for &id in &labeling.removed {
            self.check_label(id)?;
            out.extend(self.node(id).span.clone());
        }
        Ok(out)
    }

    /// Labeled nodes plus every node beneath them.
    pub fn removed_nodes(&self, labeling: &RemovalLabeling) -> Result<BTreeSet<NodeId>, TraceError> {
        let mut out = BTreeSet::new();
        for &id in &labeling.removed {
            self.check_label(id)?;
            let mut stack = vec![id];
            while let Some(n) = stack.pop() {
                if out.insert(n) {
                    stack.extend(self.node(n).children.iter().copied());
                }
            }
        }
        Ok(out)
    }

    /// Drops labels made redundant by a labeled ancestor.
    pub fn normalize(&self, labeling: &RemovalLabeling) -> RemovalLabeling {
        let removed = labeling
            .removed
            .iter()
            .copied()
            .filter(|&id| {
                let mut cur = self.node(id).parent;
                while let Some(p) = cur {
                    if labeling.removed.contains(&p) {
                        return false;
                    }
                    cur = self.node(p).parent;
                }
                true
            })
            .collect();
        RemovalLabeling { removed }
    }

    /// Position of a removable unit in [`removable_units`](Self::removable_units).
    pub fn unit_ordinal(&self, id: NodeId) -> Option<usize> {
        self.units.iter().position(|&u| u == id)
    }
}

/// A set of iterations and blocks marked as removed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RemovalLabeling {
    pub removed: BTreeSet<NodeId>,
}

impl RemovalLabeling {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
    }

    pub fn len(&self) -> usize {
        self.removed.len()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.removed.contains(&id)
    }

    pub fn with(&self, ids: impl IntoIterator<Item = NodeId>) -> Self {
        let mut removed = self.removed.clone();
        removed.extend(ids);
        RemovalLabeling { removed }
    }

    pub fn is_subset(&self, other: &RemovalLabeling) -> bool {
        self.removed.is_subset(&other.removed)
    }
}

impl FromIterator<NodeId> for RemovalLabeling {
    fn from_iter<T: IntoIterator<Item = NodeId>>(iter: T) -> Self {
        RemovalLabeling {
            removed: iter.into_iter().collect(),
        }
    }
}

/// A trace tree together with the units struck out of it.
#[derive(Debug, Clone)]
pub struct ReducedTrace {
    pub tree: Arc<TraceTree>,
    pub labeling: RemovalLabeling,
}

impl ReducedTrace {
    pub fn new(tree: Arc<TraceTree>, labeling: RemovalLabeling) -> Self {
        ReducedTrace { tree, labeling }
    }

    pub fn identity(tree: Arc<TraceTree>) -> Self {
        ReducedTrace {
            tree,
            labeling: RemovalLabeling::empty(),
        }
    }

    /// Iterations of a loop node that survive the labeling, in order.
    pub fn kept_iterations(&self, loop_node: NodeId) -> Vec<NodeId> {
        self.tree
            .node(loop_node)
            .children
            .iter()
            .copied()
            .filter(|c| !self.labeling.contains(*c))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{ChoiceDomain, PathedDecision};

    struct Rec {
        decisions: Vec<PathedDecision>,
    }

    impl Rec {
        fn push(&mut self, site: &'static str, role: Role, domain: ChoiceDomain, value: Scalar, path: &[(&'static str, u32)]) {
            let path = path.iter().map(|&(s, o)| (Site::new(s), o).into()).collect();
            let index = self.decisions.len();
            self.decisions.push(PathedDecision {
                index,
                site: Site::new(site),
                domain,
                value,
                path,
                role,
            });
        }
        fn trace(self) -> Trace {
            Trace::from_pathed("t", 0, "", self.decisions).unwrap()
        }
    }

    fn three_letter_loop() -> Trace {
        let letters = ChoiceDomain::IntRange { lo: 0, hi: 26 };
        let mut r = Rec { decisions: vec![] };
        r.push("n", Role::LoopInit, ChoiceDomain::IntRange { lo: 0, hi: 20 }, Scalar::Int(3), &[("n", 1)]);
        for i in 1..=3 {
            r.push("ch", Role::Plain, letters.clone(), Scalar::Int(i as i64 - 1), &[("n", 1), ("n", i), ("ch", 1)]);
        }
        r.trace()
    }

    #[test]
    fn three_letter_loop_shape() {
        let t = TraceTree::build(&three_letter_loop()).unwrap();
        let root = t.node(t.root());
        assert_eq!(root.children.len(), 1);
        let lp = t.node(root.children[0]);
        assert_eq!(lp.kind, NodeKind::Loop { init: 0, count: 3 });
        assert_eq!(lp.children.len(), 3);
        for (i, &it) in lp.children.iter().enumerate() {
            let n = t.node(it);
            assert_eq!(n.kind, NodeKind::Iteration { ordinal: i as u32 + 1 });
            assert_eq!(n.span, i + 1..i + 2);
        }
        assert_eq!(t.removable_units(), &lp.children[..]);
        assert_eq!(t.in_order_decisions(), vec![0, 1, 2, 3]);

        let lab: RemovalLabeling = lp.children[..2].iter().copied().collect();
        assert_eq!(t.removal_closure(&lab).unwrap().into_iter().collect::<Vec<_>>(), vec![1, 2]);
        assert!(t.removal_closure(&RemovalLabeling::empty()).unwrap().is_empty());
    }

    #[test]
    fn empty_trace_builds_bare_root() {
        let t = TraceTree::build(&Rec { decisions: vec![] }.trace()).unwrap();
        assert!(t.node(t.root()).children.is_empty());
        assert!(t.removable_units().is_empty());
    }

    #[test]
    fn missing_iteration_frames_become_empty_iterations() {
        // n = 3 but only iteration 2 issues a decision.
        let mut r = Rec { decisions: vec![] };
        r.push("n", Role::LoopInit, ChoiceDomain::IntRange { lo: 0, hi: 5 }, Scalar::Int(3), &[("n", 1)]);
        r.push("x", Role::Plain, ChoiceDomain::Bool, Scalar::Bool(true), &[("n", 1), ("n", 2), ("x", 1)]);
        r.push("y", Role::Plain, ChoiceDomain::Bool, Scalar::Bool(true), &[("y", 2)]);
        let t = TraceTree::build(&r.trace()).unwrap();
        let lp = t.node(t.root()).children[0];
        let its = &t.node(lp).children;
        assert_eq!(its.len(), 3);
        assert_eq!(t.node(its[0]).span, 1..1);
        assert_eq!(t.node(its[1]).span, 1..2);
        assert_eq!(t.node(its[2]).span, 2..2);
        assert_eq!(t.in_order_decisions(), vec![0, 1, 2]);
    }

    #[test]
    fn iteration_beyond_count_is_malformed() {
        let mut r = Rec { decisions: vec![] };
        r.push("n", Role::LoopInit, ChoiceDomain::IntRange { lo: 0, hi: 5 }, Scalar::Int(1), &[("n", 1)]);
        r.push("x", Role::Plain, ChoiceDomain::Bool, Scalar::Bool(true), &[("n", 1), ("n", 2), ("x", 1)]);
        assert!(matches!(TraceTree::build(&r.trace()), Err(TraceError::Malformed(_))));
    }

    #[test]
    fn false_selection_has_no_block() {
        let mut r = Rec { decisions: vec![] };
        r.push("b", Role::SelectInit, ChoiceDomain::Bool, Scalar::Bool(false), &[("b", 1)]);
        let t = TraceTree::build(&r.trace()).unwrap();
        let sel = t.node(t.root()).children[0];
        assert_eq!(t.node(sel).kind, NodeKind::Selection { init: 0, taken: false });
        assert!(t.node(sel).children.is_empty());
        assert!(t.removable_units().is_empty());
    }

    #[test]
    fn decision_inside_false_selection_is_malformed() {
        let mut r = Rec { decisions: vec![] };
        r.push("b", Role::SelectInit, ChoiceDomain::Bool, Scalar::Bool(false), &[("b", 1)]);
        r.push("x", Role::Plain, ChoiceDomain::Bool, Scalar::Bool(true), &[("b", 1), ("b", 1), ("x", 1)]);
        assert!(matches!(TraceTree::build(&r.trace()), Err(TraceError::Malformed(_))));
    }

    #[test]
    fn invalid_labels_are_rejected() {
        let t = TraceTree::build(&three_letter_loop()).unwrap();
        let lp = t.node(t.root()).children[0];
        let bad: RemovalLabeling = [lp].into_iter().collect();
        assert!(matches!(t.removal_closure(&bad), Err(TraceError::InvalidLabel(_))));
        let missing: RemovalLabeling = [NodeId(999)].into_iter().collect();
        assert!(matches!(t.removal_closure(&missing), Err(TraceError::InvalidLabel(_))));
    }
}
