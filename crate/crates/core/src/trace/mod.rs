//! Trace data model.
//!
//! A [`Trace`] is the ordered list of random [`Decision`]s made by one
//! generator execution. Every decision carries the identity of the code
//! location that issued it (its [`Site`]), the domain it was drawn from, the
//! value chosen, and an [`ExecutionPath`] locating it in the execution tree so
//! that decisions of different executions can be put in correspondence.

mod format;
mod tree;

use std::cmp::Ordering;
use std::fmt;
use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

pub use format::{deserialize_trace, serialize_trace, TRACE_VERSION};
pub use tree::{Node, NodeId, NodeKind, ReducedTrace, RemovalLabeling, TraceTree};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("malformed trace: {0}")]
    Malformed(String),
    #[error("invalid label: {0}")]
    InvalidLabel(String),
}

/// Identity of one choice-issuing location in a generator.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site(&'static str);

impl Site {
    pub const fn new(id: &'static str) -> Self {
        Site(id)
    }

    /// A site from a runtime name. Names are interned for the life of the
    /// process.
    pub fn owned(id: impl Into<String>) -> Self {
        static NAMES: OnceLock<Mutex<HashSet<&'static str>>> = OnceLock::new();
        let id = id.into();
        let mut names = NAMES.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
        if let Some(&name) = names.get(id.as_str()) {
            return Site(name);
        }
        let name: &'static str = Box::leak(id.into_boxed_str());
        names.insert(name);
        Site(name)
    }

    /// A site named after the calling source location.
    #[track_caller]
    pub fn caller() -> Self {
        let loc = std::panic::Location::caller();
        Site::owned(format!("{}:{}:{}", loc.file(), loc.line(), loc.column()))
    }

    pub fn as_str(&self) -> &'static str {
        self.0
    }
}

impl Serialize for Site {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.0)
    }
}

impl<'de> Deserialize<'de> for Site {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d).map(Site::owned)
    }
}

impl From<&'static str> for Site {
    fn from(id: &'static str) -> Self {
        Site::new(id)
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

/// A value produced by a random choice.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Str(Arc<str>),
}

impl Scalar {
    pub fn str(s: &str) -> Self {
        Scalar::Str(Arc::from(s))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Scalar::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Scalar::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Scalar::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(v) => write!(f, "{v}"),
            Scalar::Str(s) => write!(f, "{s:?}"),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(v) => write!(f, "{v}"),
            Scalar::Str(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::Int(v)
    }
}

impl From<bool> for Scalar {
    fn from(b: bool) -> Self {
        Scalar::Bool(b)
    }
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Scalar::str(s)
    }
}

/// The set a random choice draws from.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChoiceDomain {
    /// Integers in `lo..hi`.
    IntRange { lo: i64, hi: i64 },
    /// One of the listed values; membership is by value.
    OneOf { options: Arc<[Scalar]> },
    Bool,
}

impl ChoiceDomain {
    pub fn contains(&self, value: &Scalar) -> bool {
        match (self, value) {
            (ChoiceDomain::IntRange { lo, hi }, Scalar::Int(v)) => lo <= v && v < hi,
            (ChoiceDomain::OneOf { options }, v) => options.contains(v),
            (ChoiceDomain::Bool, Scalar::Bool(_)) => true,
            _ => false,
        }
    }

    pub fn is_well_formed(&self) -> bool {
        match self {
            ChoiceDomain::IntRange { lo, hi } => lo < hi,
            ChoiceDomain::OneOf { options } => !options.is_empty(),
            ChoiceDomain::Bool => true,
        }
    }
}

impl fmt::Debug for ChoiceDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChoiceDomain::IntRange { lo, hi } => write!(f, "[{lo},{hi})"),
            ChoiceDomain::OneOf { options } => write!(f, "one_of{:?}", &options[..]),
            ChoiceDomain::Bool => f.write_str("bool"),
        }
    }
}

/// One level of an execution path: a site and its 1-based entry number
/// among all entries of the enclosing frame.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(Site, u32)", into = "(Site, u32)")]
pub struct Frame {
    pub site: Site,
    pub occurrence: u32,
}

impl From<(Site, u32)> for Frame {
    fn from((site, occurrence): (Site, u32)) -> Self {
        Frame { site, occurrence }
    }
}

impl From<Frame> for (Site, u32) {
    fn from(f: Frame) -> Self {
        (f.site, f.occurrence)
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.site, self.occurrence)
    }
}

/// Execution index of a decision or structural node: the frames from the
/// root of the execution down to the point itself.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExecutionPath(SmallVec<[Frame; 6]>);

impl ExecutionPath {
    pub fn root() -> Self {
        ExecutionPath(SmallVec::new())
    }

    pub fn frames(&self) -> &[Frame] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, site: Site, occurrence: u32) -> Self {
        let mut frames = SmallVec::with_capacity(self.0.len() + 1);
        frames.extend_from_slice(&self.0);
        frames.push(Frame { site, occurrence });
        ExecutionPath(frames)
    }

    pub fn push(&mut self, site: Site, occurrence: u32) {
        self.0.push(Frame { site, occurrence });
    }

    pub fn pop(&mut self) -> Option<Frame> {
        self.0.pop()
    }

    pub fn last(&self) -> Option<&Frame> {
        self.0.last()
    }

    pub fn parent(&self) -> ExecutionPath {
        let mut frames = self.0.clone();
        frames.pop();
        ExecutionPath(frames)
    }

    /// True when `self` is a proper prefix of `other`.
    pub fn is_strict_prefix_of(&self, other: &ExecutionPath) -> bool {
        self.len() < other.len() && other.0[..self.len()] == self.0[..]
    }
}

impl fmt::Display for ExecutionPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        for frame in &self.0 {
            write!(f, "/{}#{}", frame.site, frame.occurrence)?;
        }
        Ok(())
    }
}

impl FromIterator<Frame> for ExecutionPath {
    fn from_iter<T: IntoIterator<Item = Frame>>(iter: T) -> Self {
        ExecutionPath(iter.into_iter().collect())
    }
}

impl fmt::Debug for ExecutionPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("/")?;
        for (i, fr) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{fr:?}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathOrder {
    Before,
    Equal,
    After,
    /// The paths split at frames with the same entry number but different
    /// sites: they belong to different branches and have no order.
    Divergent,
}

/// Document-order comparison of two execution paths.
///
/// A path precedes its extensions. At the first differing frame, entry
/// numbers decide; equal entry numbers with different sites are divergent.
pub fn path_compare(a: &ExecutionPath, b: &ExecutionPath) -> PathOrder {
    for (fa, fb) in a.0.iter().zip(b.0.iter()) {
        match fa.occurrence.cmp(&fb.occurrence) {
            Ordering::Less => return PathOrder::Before,
            Ordering::Greater => return PathOrder::After,
            Ordering::Equal if fa.site != fb.site => return PathOrder::Divergent,
            Ordering::Equal => {}
        }
    }
    match a.len().cmp(&b.len()) {
        Ordering::Less => PathOrder::Before,
        Ordering::Equal => PathOrder::Equal,
        Ordering::Greater => PathOrder::After,
    }
}

/// Structural role of a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Plain,
    /// Draws the iteration count of a reducible loop.
    LoopInit,
    /// Draws the guard of a reducible selection.
    SelectInit,
}

/// Position of an enclosing frame in a trace's frame table. Frame 0 is the
/// root of the execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrameId(pub u32);

impl FrameId {
    pub const ROOT: FrameId = FrameId(0);
}

/// A frame of the table: its enclosing frame and its own site and entry
/// number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameEntry {
    pub parent: FrameId,
    pub frame: Frame,
}

/// One recorded random choice. Its execution path is the path of `frame`
/// extended by `(site, occurrence)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub index: usize,
    pub site: Site,
    pub domain: ChoiceDomain,
    pub value: Scalar,
    pub frame: FrameId,
    pub occurrence: u32,
    pub role: Role,
}

/// A decision with its full execution path spelled out; the form used by
/// the trace file format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathedDecision {
    pub index: usize,
    pub site: Site,
    pub domain: ChoiceDomain,
    pub value: Scalar,
    pub path: ExecutionPath,
    pub role: Role,
}

impl Decision {
    fn check(&self) -> Result<(), String> {
        if self.site.as_str().is_empty() {
            return Err(format!("decision {} has an empty site", self.index));
        }
        if !self.domain.is_well_formed() {
            return Err(format!("decision {} has an empty domain", self.index));
        }
        if !self.domain.contains(&self.value) {
            return Err(format!(
                "decision {}: value {:?} outside domain {:?}",
                self.index, self.value, self.domain
            ));
        }
        match (self.role, &self.domain) {
            (Role::LoopInit, ChoiceDomain::IntRange { lo: 0, .. }) => Ok(()),
            (Role::LoopInit, d) => Err(format!("loop init {} has domain {d:?}", self.index)),
            (Role::SelectInit, ChoiceDomain::Bool) => Ok(()),
            (Role::SelectInit, d) => Err(format!("selection init {} has domain {d:?}", self.index)),
            (Role::Plain, _) => Ok(()),
        }
    }
}

/// The decisions of one generator execution, in execution order, and the
/// table of frames enclosing them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub generator_id: String,
    pub seed: u64,
    /// Fingerprint of the generated input's serialization (see
    /// [`digest_hex`]).
    pub output_digest: String,
    /// Frames that enclose at least one decision, each listed after its
    /// parent. `FrameId(k)` for `k >= 1` is `frames[k - 1]`.
    pub frames: Vec<FrameEntry>,
    pub decisions: Vec<Decision>,
}

impl Trace {
    pub fn new(generator_id: impl Into<String>, seed: u64, output_digest: impl Into<String>) -> Self {
        Trace {
            generator_id: generator_id.into(),
            seed,
            output_digest: output_digest.into(),
            frames: Vec::new(),
            decisions: Vec::new(),
        }
    }

    /// Builds a trace from decisions carrying full paths, sharing the
    /// frames common to several paths. The result is validated.
    pub fn from_pathed(
        generator_id: impl Into<String>,
        seed: u64,
        output_digest: impl Into<String>,
        decisions: Vec<PathedDecision>,
    ) -> Result<Trace, TraceError> {
        let mut trace = Trace::new(generator_id, seed, output_digest);
        let mut interned: HashMap<(FrameId, Frame), FrameId> = HashMap::new();
        for d in decisions {
            let Some((last, enclosing)) = d.path.frames().split_last() else {
                return Err(TraceError::Malformed(format!("decision {} has an empty path", d.index)));
            };
            if last.site != d.site {
                return Err(TraceError::Malformed(format!(
                    "decision {} path {:?} does not end at its site",
                    d.index, d.path
                )));
            }
            let mut frame = FrameId::ROOT;
            for &f in enclosing {
                frame = *interned.entry((frame, f)).or_insert_with(|| {
                    trace.frames.push(FrameEntry { parent: frame, frame: f });
                    FrameId(trace.frames.len() as u32)
                });
            }
            trace.decisions.push(Decision {
                index: d.index,
                site: d.site,
                domain: d.domain,
                value: d.value,
                frame,
                occurrence: last.occurrence,
                role: d.role,
            });
        }
        trace.validate()?;
        Ok(trace)
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    /// Execution path of a frame of the table.
    pub fn frame_path(&self, id: FrameId) -> ExecutionPath {
        let mut frames = SmallVec::<[Frame; 6]>::new();
        let mut at = id;
        while at != FrameId::ROOT {
            let e = &self.frames[at.0 as usize - 1];
            frames.push(e.frame);
            at = e.parent;
        }
        frames.reverse();
        ExecutionPath(frames)
    }

    /// Execution path of decision `i`.
    pub fn path(&self, i: usize) -> ExecutionPath {
        let d = &self.decisions[i];
        let mut p = self.frame_path(d.frame);
        p.push(d.site, d.occurrence);
        p
    }

    /// Execution paths of all decisions, in order.
    pub fn paths(&self) -> Vec<ExecutionPath> {
        let mut frame_paths = Vec::with_capacity(self.frames.len() + 1);
        frame_paths.push(ExecutionPath::root());
        for e in &self.frames {
            let parent: &ExecutionPath = &frame_paths[e.parent.0 as usize];
            let p = parent.child(e.frame.site, e.frame.occurrence);
            frame_paths.push(p);
        }
        self.decisions
            .iter()
            .map(|d| frame_paths[d.frame.0 as usize].child(d.site, d.occurrence))
            .collect()
    }

    /// Decision `i` with its path spelled out.
    pub fn pathed(&self, i: usize) -> PathedDecision {
        let d = &self.decisions[i];
        PathedDecision {
            index: d.index,
            site: d.site,
            domain: d.domain.clone(),
            value: d.value.clone(),
            path: self.path(i),
            role: d.role,
        }
    }

    /// Checks the frame table, indices, per-decision validity and strictly
    /// increasing paths.
    pub fn validate(&self) -> Result<(), TraceError> {
        for (k, e) in self.frames.iter().enumerate() {
            if e.parent.0 as usize > k {
                return Err(TraceError::Malformed(format!(
                    "frame {} lists parent {} out of order",
                    k + 1,
                    e.parent.0
                )));
            }
        }
        for (i, d) in self.decisions.iter().enumerate() {
            if d.index != i {
                return Err(TraceError::Malformed(format!(
                    "decision at position {i} carries index {}",
                    d.index
                )));
            }
            if d.frame.0 as usize > self.frames.len() {
                return Err(TraceError::Malformed(format!("decision {i} names unknown frame {}", d.frame.0)));
            }
            d.check().map_err(TraceError::Malformed)?;
        }
        let paths = self.paths();
        for (i, w) in paths.windows(2).enumerate() {
            if path_compare(&w[0], &w[1]) != PathOrder::Before {
                return Err(TraceError::Malformed(format!(
                    "paths of decisions {} and {} are not in document order: {:?} vs {:?}",
                    i,
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(())
    }
}

/// 32 hex digits of the XXH3-128 hash of `bytes`. Used to fingerprint
/// inputs and labelings, not for security.
pub fn digest_hex(bytes: &[u8]) -> String {
    const HEX: &[u8; 16] = b"0123456789abcdef";
    let h = xxhash_rust::xxh3::xxh3_128(bytes);
    let digits: Vec<u8> = (0..32).rev().map(|k| HEX[(h >> (4 * k)) as usize & 15]).collect();
    String::from_utf8(digits).expect("hex digits are ASCII")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(frames: &[(&'static str, u32)]) -> ExecutionPath {
        frames
            .iter()
            .map(|&(s, o)| Frame {
                site: Site::new(s),
                occurrence: o,
            })
            .collect()
    }

    #[test]
    fn path_compare_cases() {
        let a = path(&[("len", 1), ("len", 1), ("letter", 1)]);
        let b = path(&[("len", 1), ("len", 2), ("letter", 1)]);
        assert_eq!(path_compare(&a, &a), PathOrder::Equal);
        assert_eq!(path_compare(&a, &b), PathOrder::Before);
        assert_eq!(path_compare(&b, &a), PathOrder::After);

        let prefix = path(&[("len", 1)]);
        assert_eq!(path_compare(&prefix, &a), PathOrder::Before);
        assert_eq!(path_compare(&a, &prefix), PathOrder::After);

        let x = path(&[("f", 2), ("g", 1)]);
        let y = path(&[("h", 2), ("g", 1)]);
        assert_eq!(path_compare(&x, &y), PathOrder::Divergent);
        assert_eq!(path_compare(&y, &x), PathOrder::Divergent);
    }

    #[test]
    fn domain_membership() {
        let r = ChoiceDomain::IntRange { lo: 0, hi: 26 };
        assert!(r.contains(&Scalar::Int(0)));
        assert!(r.contains(&Scalar::Int(25)));
        assert!(!r.contains(&Scalar::Int(26)));
        assert!(!r.contains(&Scalar::Bool(true)));

        let o = ChoiceDomain::OneOf {
            options: Arc::from(vec![Scalar::Int(0), Scalar::Int(0), Scalar::str("a")]),
        };
        assert!(o.contains(&Scalar::Int(0)));
        assert!(o.contains(&Scalar::str("a")));
        assert!(!o.contains(&Scalar::Int(1)));

        assert!(ChoiceDomain::Bool.contains(&Scalar::Bool(false)));
        assert!(!ChoiceDomain::Bool.contains(&Scalar::Int(0)));
        assert!(!ChoiceDomain::IntRange { lo: 3, hi: 3 }.is_well_formed());
    }

    #[test]
    fn strict_prefix() {
        let a = path(&[("a", 1)]);
        let b = path(&[("a", 1), ("b", 1)]);
        assert!(a.is_strict_prefix_of(&b));
        assert!(!b.is_strict_prefix_of(&a));
        assert!(!a.is_strict_prefix_of(&a));
        assert!(ExecutionPath::root().is_strict_prefix_of(&a));
    }
}
