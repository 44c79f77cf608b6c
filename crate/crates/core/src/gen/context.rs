use std::panic::Location;
use std::sync::Arc;

use smallvec::{smallvec, SmallVec};

use crate::prng::SplitMix64;
use crate::trace::{ChoiceDomain, Decision, ExecutionPath, FrameEntry, FrameId, Role, Scalar, Site};

use super::align::{Aligner, BoolServe, LoopServe, ValueServe};
use super::GenError;

pub(crate) enum Engine<'t> {
    Bare,
    Record,
    Align(Aligner<'t>),
    Replay { seq: &'t [Scalar], pos: usize },
}

struct SiteUse {
    depth: usize,
    site: Site,
    loc: &'static Location<'static>,
}

/// Execution state handed to a generator. All randomness must be drawn
/// through its combinators.
pub struct GenContext<'t> {
    pub(crate) engine: Engine<'t>,
    rng: SplitMix64,
    path: ExecutionPath,
    /// Frame-table id of each frame of `path`, assigned when the first
    /// decision inside it is recorded.
    frame_ids: SmallVec<[Option<FrameId>; 16]>,
    counters: SmallVec<[u32; 16]>,
    pub(crate) frames: Vec<FrameEntry>,
    pub(crate) decisions: Vec<Decision>,
    site_uses: SmallVec<[SiteUse; 8]>,
    /// Set once the execution has been abandoned; every further request is
    /// answered with a trivial value and nothing is recorded.
    draining: bool,
    pub(crate) fault: Option<GenError>,
}

fn draw(rng: &mut SplitMix64, domain: &ChoiceDomain) -> Scalar {
    match domain {
        ChoiceDomain::IntRange { lo, hi } => Scalar::Int(rng.int_in(*lo, *hi)),
        ChoiceDomain::OneOf { options } => options[rng.below(options.len() as u64) as usize].clone(),
        ChoiceDomain::Bool => Scalar::Bool(rng.coin()),
    }
}

fn trivial(domain: &ChoiceDomain) -> Scalar {
    match domain {
        ChoiceDomain::IntRange { lo, .. } => Scalar::Int(*lo),
        ChoiceDomain::OneOf { options } => options[0].clone(),
        ChoiceDomain::Bool => Scalar::Bool(false),
    }
}

impl<'t> GenContext<'t> {
    fn with_engine(engine: Engine<'t>, seed: u64) -> Self {
        GenContext {
            engine,
            rng: SplitMix64::new(seed),
            path: ExecutionPath::root(),
            frame_ids: SmallVec::new(),
            counters: smallvec![0],
            frames: Vec::new(),
            decisions: Vec::new(),
            site_uses: SmallVec::new(),
            draining: false,
            fault: None,
        }
    }

    pub(crate) fn bare(seed: u64) -> Self {
        Self::with_engine(Engine::Bare, seed)
    }

    pub(crate) fn record(seed: u64) -> Self {
        let mut ctx = Self::with_engine(Engine::Record, seed);
        ctx.decisions.reserve(32);
        ctx.frames.reserve(32);
        ctx
    }

    pub(crate) fn align(aligner: Aligner<'t>, realign_seed: u64) -> Self {
        Self::with_engine(Engine::Align(aligner), realign_seed)
    }

    pub(crate) fn replay(seq: &'t [Scalar], fallback_seed: u64) -> Self {
        Self::with_engine(Engine::Replay { seq, pos: 0 }, fallback_seed)
    }

    fn is_bare(&self) -> bool {
        matches!(self.engine, Engine::Bare)
    }

    fn records(&self) -> bool {
        matches!(self.engine, Engine::Record | Engine::Align(_))
    }

    /// Counts a new entry in the current frame and returns its number.
    fn enter(&mut self, site: &Site, loc: &'static Location<'static>) -> u32 {
        let counter = self.counters.last_mut().expect("root frame");
        *counter += 1;
        let occurrence = *counter;
        if matches!(self.engine, Engine::Record) {
            self.check_site(site, loc);
        }
        occurrence
    }

    fn check_site(&mut self, site: &Site, loc: &'static Location<'static>) {
        let depth = self.counters.len();
        for u in self.site_uses.iter().rev() {
            if u.depth < depth {
                break;
            }
            if u.site == *site {
                if u.loc != loc {
                    self.fault.get_or_insert(GenError::DuplicateSite {
                        site: site.to_string(),
                        first: u.loc.to_string(),
                        second: loc.to_string(),
                    });
                    self.draining = true;
                }
                return;
            }
        }
        self.site_uses.push(SiteUse {
            depth,
            site: *site,
            loc,
        });
    }

    fn push_path(&mut self, site: Site, occurrence: u32) {
        self.path.push(site, occurrence);
        self.frame_ids.push(None);
    }

    fn pop_path(&mut self) {
        self.path.pop();
        self.frame_ids.pop();
    }

    /// Frame-table id of the innermost live frame, adding the live frames
    /// that have none yet.
    fn current_frame(&mut self) -> FrameId {
        let mut k = self.frame_ids.len();
        while k > 0 && self.frame_ids[k - 1].is_none() {
            k -= 1;
        }
        let mut parent = k.checked_sub(1).and_then(|j| self.frame_ids[j]).unwrap_or(FrameId::ROOT);
        for (id, &frame) in self.frame_ids[k..].iter_mut().zip(&self.path.frames()[k..]) {
            self.frames.push(FrameEntry { parent, frame });
            parent = FrameId(self.frames.len() as u32);
            *id = Some(parent);
        }
        parent
    }

    fn open_frame(&mut self, site: &Site, ordinal: u32, recorded: Option<ExecutionPath>) {
        self.push_path(*site, ordinal);
        self.counters.push(0);
        if let Engine::Align(al) = &mut self.engine {
            al.push_frame(recorded);
        }
    }

    fn close_frame(&mut self) {
        let depth = self.counters.len();
        while self.site_uses.last().is_some_and(|u| u.depth >= depth) {
            self.site_uses.pop();
        }
        if let Engine::Align(al) = &mut self.engine {
            al.pop_frame();
        }
        self.counters.pop();
        self.pop_path();
    }

    fn push_decision(&mut self, site: Site, domain: ChoiceDomain, value: Scalar, occurrence: u32, role: Role) {
        let frame = self.current_frame();
        self.decisions.push(Decision {
            index: self.decisions.len(),
            site,
            domain,
            value,
            frame,
            occurrence,
            role,
        });
    }

    fn replay_value(seq: &[Scalar], pos: &mut usize, rng: &mut SplitMix64, domain: &ChoiceDomain) -> Scalar {
        if let Some(v) = seq.get(*pos) {
            *pos += 1;
            if domain.contains(v) {
                return v.clone();
            }
        }
        draw(rng, domain)
    }

    fn decide(&mut self, site: Site, domain: ChoiceDomain, loc: &'static Location<'static>) -> Scalar {
        if self.draining {
            return trivial(&domain);
        }
        let occurrence = self.enter(&site, loc);
        let value = match &mut self.engine {
            Engine::Bare | Engine::Record => draw(&mut self.rng, &domain),
            Engine::Align(al) => {
                let path = &self.path;
                let served = al.plain(
                    &site,
                    occurrence,
                    || path.child(site, occurrence),
                    |d| domain.contains(&d.value),
                );
                match served {
                    ValueServe::Replay(d) => {
                        assert!(domain.contains(&d.value), "replayed value outside live domain");
                        d.value.clone()
                    }
                    ValueServe::Fresh => draw(&mut self.rng, &domain),
                    ValueServe::Drain => {
                        self.draining = true;
                        return trivial(&domain);
                    }
                }
            }
            Engine::Replay { seq, pos } => Self::replay_value(seq, pos, &mut self.rng, &domain),
        };
        if self.records() && !self.draining {
            self.push_decision(site, domain, value.clone(), occurrence, Role::Plain);
        }
        value
    }

    /// Uniform integer in `lo..hi`.
    #[track_caller]
    pub fn choose_int(&mut self, site: impl Into<Site>, lo: i64, hi: i64) -> i64 {
        assert!(lo < hi, "choose_int over empty range {lo}..{hi}");
        if self.is_bare() {
            return self.rng.int_in(lo, hi);
        }
        let v = self.decide(site.into(), ChoiceDomain::IntRange { lo, hi }, Location::caller());
        v.as_int().expect("integer domain yields integers")
    }

    /// One of `options`, uniformly by position.
    #[track_caller]
    pub fn choose_from(&mut self, site: impl Into<Site>, options: &Arc<[Scalar]>) -> Scalar {
        assert!(!options.is_empty(), "choose_from over no options");
        if self.is_bare() {
            return options[self.rng.below(options.len() as u64) as usize].clone();
        }
        self.decide(
            site.into(),
            ChoiceDomain::OneOf {
                options: options.clone(),
            },
            Location::caller(),
        )
    }

    /// Runs `body` for iterations `1..=n` with `n` drawn from `0..max`, and
    /// returns `n`. Each iteration is a removable unit.
    #[track_caller]
    pub fn repeat(&mut self, site: impl Into<Site>, max: u32, mut body: impl FnMut(&mut Self, u32)) -> u32 {
        assert!(max >= 1, "repeat needs max >= 1");
        if self.is_bare() {
            let n = self.rng.below(u64::from(max)) as u32;
            for i in 1..=n {
                body(self, i);
            }
            return n;
        }
        if self.draining {
            return 0;
        }
        let site = site.into();
        let occurrence = self.enter(&site, Location::caller());
        let max64 = u64::from(max);
        let (n, map) = match &mut self.engine {
            Engine::Bare | Engine::Record => (self.rng.below(max64) as u32, None),
            Engine::Align(al) => {
                let path = &self.path;
                match al.loop_init(&site, occurrence, max, || path.child(site, occurrence)) {
                    LoopServe::Count(k, map) => (k, map),
                    LoopServe::Fresh(map) => (self.rng.below(max64) as u32, map),
                    LoopServe::Drain => {
                        self.draining = true;
                        return 0;
                    }
                }
            }
            Engine::Replay { seq, pos } => {
                let domain = ChoiceDomain::IntRange { lo: 0, hi: i64::from(max) };
                let v = Self::replay_value(seq, pos, &mut self.rng, &domain);
                (v.as_int().expect("integer domain") as u32, None)
            }
        };
        if self.records() {
            self.push_decision(
                site,
                ChoiceDomain::IntRange { lo: 0, hi: i64::from(max) },
                Scalar::Int(i64::from(n)),
                occurrence,
                Role::LoopInit,
            );
        }
        self.push_path(site, occurrence);
        for i in 1..=n {
            if self.draining {
                break;
            }
            let recorded = map
                .as_ref()
                .and_then(|m| m.ordinals.get(i as usize - 1).map(|&o| m.path.child(site, o)));
            self.open_frame(&site, i, recorded);
            body(self, i);
            self.close_frame();
        }
        self.pop_path();
        n
    }

    /// Runs `body` if a drawn coin comes up true. The block is a removable
    /// unit; a false draw is not.
    #[track_caller]
    pub fn maybe(&mut self, site: impl Into<Site>, body: impl FnOnce(&mut Self)) -> bool {
        if self.is_bare() {
            let taken = self.rng.coin();
            if taken {
                body(self);
            }
            return taken;
        }
        if self.draining {
            return false;
        }
        let site = site.into();
        let occurrence = self.enter(&site, Location::caller());
        let (taken, recorded) = match &mut self.engine {
            Engine::Bare | Engine::Record => (self.rng.coin(), None),
            Engine::Align(al) => {
                let path = &self.path;
                match al.select_init(&site, occurrence, || path.child(site, occurrence)) {
                    BoolServe::Value(b, recorded) => (b, recorded),
                    BoolServe::Fresh => (self.rng.coin(), None),
                    BoolServe::Drain => {
                        self.draining = true;
                        return false;
                    }
                }
            }
            Engine::Replay { seq, pos } => {
                let v = Self::replay_value(seq, pos, &mut self.rng, &ChoiceDomain::Bool);
                (v == Scalar::Bool(true), None)
            }
        };
        if self.records() {
            self.push_decision(site, ChoiceDomain::Bool, Scalar::Bool(taken), occurrence, Role::SelectInit);
        }
        if taken {
            self.push_path(site, occurrence);
            self.open_frame(&site, 1, recorded);
            body(self);
            self.close_frame();
            self.pop_path();
        }
        taken
    }

    /// True once the execution has been abandoned (halt, bypass restart or
    /// an authoring fault). Generators may use it to stop early.
    pub fn is_abandoned(&self) -> bool {
        self.draining
    }

    pub(crate) fn finish_align(&mut self) -> Option<Aligner<'t>> {
        match std::mem::replace(&mut self.engine, Engine::Bare) {
            Engine::Align(mut al) => {
                if !self.draining {
                    al.finish();
                }
                Some(al)
            }
            other => {
                self.engine = other;
                None
            }
        }
    }
}
