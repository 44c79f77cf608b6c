//! Generator-based test-case reduction.
//!
//! A bug-inducing input produced by a generator is reduced by shrinking the
//! generator's recorded trace of random decisions and re-executing the
//! generator against the reduced trace. Every candidate is produced by the
//! generator itself, so it satisfies whatever validity rules the generator
//! enforces.
//!
//! * [`trace`]: decisions, execution paths, trace trees, removal labelings
//!   and the JSON trace format.
//! * [`gen`]: the combinator surface and the record/align engines.
//! * [`reduce`]: powerset, ddmin and HDD searches over removal labelings.
//! * [`baselines`]: raw-input ddmin and choice-sequence deletion.
//! * [`cases`]: bundled generators, bug predicates and validity checkers.

pub mod baselines;
pub mod cases;
pub mod gen;
pub mod prng;
pub mod reduce;
pub mod trace;
