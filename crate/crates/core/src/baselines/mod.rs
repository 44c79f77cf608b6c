//! Reference reducers: ddmin over the raw input text, and deletion over
//! the flat sequence of recorded choices.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::gen::{replay_choices, ChoiceSequence, GeneratedInput, Generator, Size};
use crate::reduce::{ddmin, Interrupted, PropertyTest, ReductionMetrics, Verdict};
use crate::trace::{Scalar, Trace};

/// Granularity of raw-input reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenizer {
    /// Lines including their terminating newline.
    Lines,
    Chars,
}

/// A text split into tokens that concatenate back to the original.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenView {
    pub tokens: Vec<String>,
}

impl TokenView {
    pub fn new(text: &str, tokenizer: Tokenizer) -> Self {
        let tokens = match tokenizer {
            Tokenizer::Lines => text.split_inclusive('\n').map(str::to_string).collect(),
            Tokenizer::Chars => text.chars().map(String::from).collect(),
        };
        TokenView { tokens }
    }

    pub fn reassemble(&self, keep: &[usize]) -> String {
        keep.iter().map(|&i| self.tokens[i].as_str()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub final_input: GeneratedInput,
    pub metrics: ReductionMetrics,
}

struct Tally {
    started: Instant,
    deadline: Option<Instant>,
    candidates: u64,
    valid: u64,
    cache: HashMap<String, bool>,
}

impl Tally {
    fn new(timeout: Option<Duration>) -> Self {
        let started = Instant::now();
        Tally {
            started,
            deadline: timeout.map(|t| started + t),
            candidates: 0,
            valid: 0,
            cache: HashMap::new(),
        }
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn metrics(&self, original: Size, fin: Size, property: &PropertyTest, timed_out: bool) -> ReductionMetrics {
        ReductionMetrics {
            size_original: original,
            size_final: fin,
            wall_time: self.started.elapsed().as_secs_f64(),
            property_tests: property.calls(),
            candidates: self.candidates,
            completed: self.candidates,
            valid_completed: self.valid,
            halted: 0,
            generator_errors: 0,
            prog_mismatches: 0,
            dec_mismatches: 0,
            bypassed_units: 0,
            realigned_values: 0,
            removable_units: 0,
            timed_out,
        }
    }
}

/// ddmin over the tokens of `text` under a predicate on raw text. Every
/// candidate is run through `validity` to measure how many candidates
/// were well-formed inputs.
pub fn raw_ddmin(
    text: &str,
    tokenizer: Tokenizer,
    property: &PropertyTest,
    validity: fn(&str) -> bool,
    measure: fn(&str) -> Size,
    timeout: Option<Duration>,
) -> BaselineResult {
    let view = TokenView::new(text, tokenizer);
    let mut tally = Tally::new(timeout);
    tally.cache.insert(text.to_string(), true);
    let (kept, interrupted) = ddmin((0..view.tokens.len()).collect(), |keep| {
        let candidate = view.reassemble(keep);
        if let Some(&holds) = tally.cache.get(&candidate) {
            return Ok(if holds { Verdict::Pass(keep.to_vec()) } else { Verdict::Fail });
        }
        if tally.expired() {
            return Err(Interrupted);
        }
        tally.candidates += 1;
        if validity(&candidate) {
            tally.valid += 1;
        }
        let holds = property.call_text(&candidate);
        tally.cache.insert(candidate, holds);
        Ok(if holds { Verdict::Pass(keep.to_vec()) } else { Verdict::Fail })
    });
    let final_text = view.reassemble(&kept);
    let size = measure(&final_text);
    BaselineResult {
        metrics: tally.metrics(measure(text), size, property, interrupted),
        final_input: GeneratedInput {
            text: final_text,
            size,
        },
    }
}

/// The decisions of a trace as a flat sequence.
pub fn choice_sequence(trace: &Trace) -> ChoiceSequence {
    trace
        .decisions
        .iter()
        .map(|d| (d.domain.clone(), d.value.clone()))
        .collect()
}

/// Seed of the PRNG that answers requests a shortened sequence cannot.
pub const CHOICE_FALLBACK_SEED: u64 = 0;

/// ddmin deletion over the recorded choice sequence. Each candidate
/// replays the remaining choices in order; a choice invalid for its live
/// domain, or a request past the end, gets a deterministic fresh draw.
pub fn choice_delete_shrink(
    gen: &dyn Generator,
    trace: &Trace,
    property: &PropertyTest,
    validity: fn(&str) -> bool,
    timeout: Option<Duration>,
) -> BaselineResult {
    let values: Vec<Scalar> = trace.decisions.iter().map(|d| d.value.clone()).collect();
    let mut tally = Tally::new(timeout);
    let original = replay_choices(gen, &values, CHOICE_FALLBACK_SEED).expect("the recorded run replays");
    tally.cache.insert(original.text.clone(), true);
    let limit = original.size.total();
    let mut best = original.clone();
    let mut outputs: HashMap<Vec<usize>, Option<GeneratedInput>> = HashMap::new();
    let (_, interrupted) = ddmin((0..values.len()).collect(), |keep| {
        if tally.expired() {
            return Err(Interrupted);
        }
        let input = outputs
            .entry(keep.to_vec())
            .or_insert_with(|| {
                tally.candidates += 1;
                let seq: Vec<Scalar> = keep.iter().map(|&i| values[i].clone()).collect();
                let input = replay_choices(gen, &seq, CHOICE_FALLBACK_SEED).ok();
                if input.as_ref().is_some_and(|i| validity(&i.text)) {
                    tally.valid += 1;
                }
                input
            })
            .clone();
        let Some(input) = input else { return Ok(Verdict::Fail) };
        let holds = input.size.total() <= limit
            && match tally.cache.get(&input.text) {
                Some(&h) => h,
                None => {
                    let h = property.call(&input);
                    tally.cache.insert(input.text.clone(), h);
                    h
                }
            };
        if !holds {
            return Ok(Verdict::Fail);
        }
        best = input;
        Ok(Verdict::Pass(keep.to_vec()))
    });
    BaselineResult {
        metrics: tally.metrics(original.size, best.size, property, interrupted),
        final_input: best,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_views_reassemble() {
        let text = "n 0\ne 0 0\n";
        let v = TokenView::new(text, Tokenizer::Lines);
        assert_eq!(v.tokens, vec!["n 0\n", "e 0 0\n"]);
        assert_eq!(v.reassemble(&[0, 1]), text);
        let v = TokenView::new("abc", Tokenizer::Chars);
        assert_eq!(v.reassemble(&[0, 2]), "ac");
    }

    #[test]
    fn raw_ddmin_nonempty_predicate_keeps_one_token() {
        let p = PropertyTest::new(|t: &str| !t.is_empty());
        let r = raw_ddmin("abcdef", Tokenizer::Chars, &p, |_| true, |t| Size::Chars(t.len()), None);
        assert_eq!(r.final_input.text.len(), 1);
    }
}
