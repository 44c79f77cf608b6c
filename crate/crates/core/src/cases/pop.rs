//! A generator whose selection block shrinks the output: the list `[1, 2]`
//! loses its last element when the coin comes up true. Removing the block
//! therefore grows the input, so reduction over it is not monotone. Not
//! used for reduction runs.

use std::sync::Arc;

use super::{CaseSpec, Predicate};
use crate::baselines::Tokenizer;
use crate::gen::{generator, GenContext, GeneratedInput, Size};

pub const ID: &str = "pop-demo";

/// Records the coin as true, yielding `[1]`.
pub const FIXTURE_SEED: u64 = 0;

pub fn generate(ctx: &mut GenContext<'_>) -> GeneratedInput {
    let mut x = vec![1, 2];
    ctx.maybe("pop", |_| {
        x.pop();
    });
    let items: Vec<String> = x.iter().map(i64::to_string).collect();
    GeneratedInput::chars(format!("[{}]", items.join(", ")))
}

pub fn is_valid(text: &str) -> bool {
    matches!(text, "[1]" | "[1, 2]")
}

pub fn measure(text: &str) -> Size {
    Size::Chars(text.chars().count())
}

pub fn case() -> CaseSpec {
    CaseSpec {
        name: "pop-demo",
        summary: "non-monotone demonstration: a selection that removes output",
        generator: Arc::new(generator(ID, generate)),
        fixture_seed: FIXTURE_SEED,
        property: |_| -> Predicate { Arc::new(|_| true) },
        validity: is_valid,
        measure,
        dependency_bearing: false,
        tokenizer: Tokenizer::Chars,
        reducible: false,
    }
}
