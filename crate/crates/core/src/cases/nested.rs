//! Bracketed groups `[B?C*]`: up to three groups, each with an optional
//! letter and up to three digits. Loops nest a selection and a loop, so the
//! trace tree has removable units at two levels. The bug is any input
//! containing the digit 7.

use std::sync::{Arc, OnceLock};

use super::{CaseSpec, Predicate};
use crate::baselines::Tokenizer;
use crate::gen::{generator, GenContext, GeneratedInput, Size};
use crate::trace::Scalar;

pub const ID: &str = "nested";

/// Two groups: the first with a letter and the single digit 7, the second
/// with no letter and two digits other than 7.
pub const FIXTURE_SEED: u64 = 12268;

fn letters() -> &'static Arc<[Scalar]> {
    static LETTERS: OnceLock<Arc<[Scalar]>> = OnceLock::new();
    LETTERS.get_or_init(|| ["x", "y", "z"].into_iter().map(Scalar::str).collect())
}

pub fn generate(ctx: &mut GenContext<'_>) -> GeneratedInput {
    let mut s = String::new();
    ctx.repeat("a", 4, |ctx, _| {
        s.push('[');
        ctx.maybe("b", |ctx| {
            let l = ctx.choose_from("b.letter", letters());
            s.push_str(l.as_str().expect("letters are strings"));
        });
        ctx.repeat("c", 4, |ctx, _| {
            let d = ctx.choose_int("c.digit", 0, 10);
            s.push(char::from(b'0' + d as u8));
        });
        s.push(']');
    });
    GeneratedInput::chars(s)
}

pub fn property(text: &str) -> bool {
    text.contains('7')
}

pub fn is_valid(text: &str) -> bool {
    let mut groups = 0;
    let mut rest = text.as_bytes();
    while let Some((&b'[', tail)) = rest.split_first() {
        let end = match tail.iter().position(|&c| c == b']') {
            Some(e) => e,
            None => return false,
        };
        let body = &tail[..end];
        let digits = match body.first() {
            Some(b'x' | b'y' | b'z') => &body[1..],
            _ => body,
        };
        if digits.len() > 3 || !digits.iter().all(u8::is_ascii_digit) {
            return false;
        }
        groups += 1;
        rest = &tail[end + 1..];
    }
    rest.is_empty() && groups <= 3
}

pub fn measure(text: &str) -> Size {
    Size::Chars(text.chars().count())
}

pub fn case() -> CaseSpec {
    CaseSpec {
        name: "nested",
        summary: "bracketed groups [B?C*] with a nested selection and loop; bug: contains '7'",
        generator: Arc::new(generator(ID, generate)),
        fixture_seed: FIXTURE_SEED,
        property: |_| -> Predicate { Arc::new(property) },
        validity: is_valid,
        measure,
        dependency_bearing: false,
        tokenizer: Tokenizer::Chars,
        reducible: true,
    }
}
