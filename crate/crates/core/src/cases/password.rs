//! Strings of the form `w\nw\n` for a random lowercase word `w` of fewer
//! than 20 letters. The bug is any such input containing `c`.

use std::sync::{Arc, OnceLock};

use super::{CaseSpec, Predicate};
use crate::baselines::Tokenizer;
use crate::gen::{generator, GenContext, GeneratedInput, Size};
use crate::trace::Scalar;

pub const ID: &str = "password";

/// Records to `"abc\nabc\n"`.
pub const FIXTURE_SEED: u64 = 889624;

fn letters() -> &'static Arc<[Scalar]> {
    static LETTERS: OnceLock<Arc<[Scalar]>> = OnceLock::new();
    LETTERS.get_or_init(|| ('a'..='z').map(|c| Scalar::str(&c.to_string())).collect())
}

pub fn generate(ctx: &mut GenContext<'_>) -> GeneratedInput {
    let letters = letters();
    let mut w = String::new();
    ctx.repeat("letters", 20, |ctx, _| {
        let letter = ctx.choose_from("letter", letters);
        w.push_str(letter.as_str().expect("letters are strings"));
    });
    w.push('\n');
    GeneratedInput::chars(format!("{w}{w}"))
}

/// Ends with a newline, both halves are equal, and contains `c`.
pub fn property(text: &str) -> bool {
    let b = text.as_bytes();
    b.last() == Some(&b'\n') && b[..b.len() / 2] == b[b.len() / 2..] && text.contains('c')
}

pub fn is_valid(text: &str) -> bool {
    let b = text.as_bytes();
    if !b.len().is_multiple_of(2) || b[..b.len() / 2] != b[b.len() / 2..] {
        return false;
    }
    match b[..b.len() / 2].split_last() {
        Some((b'\n', word)) => word.len() < 20 && word.iter().all(u8::is_ascii_lowercase),
        _ => false,
    }
}

pub fn measure(text: &str) -> Size {
    Size::Chars(text.chars().count())
}

pub fn case() -> CaseSpec {
    CaseSpec {
        name: "password",
        summary: "w\\nw\\n for a random lowercase word w; bug: contains 'c'",
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn property_matches_hand_evaluation() {
        assert!(property("abc\nabc\n"));
        assert!(property("c\nc\n"));
        assert!(!property("ab\nab\n"));
        assert!(!property("c\nd\n"));
        assert!(!property(""));
    }

    #[test]
    fn validity() {
        assert!(is_valid("abc\nabc\n"));
        assert!(is_valid("\n\n"));
        assert!(!is_valid("abc\nab\n"));
        assert!(!is_valid("aBc\naBc\n"));
        assert!(!is_valid(""));
    }
}
