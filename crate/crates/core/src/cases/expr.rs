//! Straight-line programs over integers:
//!
//! ```text
//! let v12 = (3 + 4);
//! let v7 = -v12;
//! return ((v7 * 2) / v12);
//! ```
//!
//! Variables are drawn from the names declared so far, so removing a
//! declaration makes recorded variable uses invalid. The bundled compiler
//! has an injected crash in its negation folding pass: a quotient directly
//! under two negations.

use std::collections::HashSet;
use std::sync::{Arc, OnceLock};

use super::{crash_oracle, CaseSpec, Predicate, SimilaritySpec};
use crate::baselines::Tokenizer;
use crate::gen::{generator, GenContext, GeneratedInput, Size};
use crate::trace::Scalar;

pub const ID: &str = "expr";
pub const ID_UNCHECKED: &str = "expr-unchecked";

/// Four statements; the second crashes the negation folder.
pub const FIXTURE_SEED: u64 = 34;

const MAX_DEPTH: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Lit(i64),
    Var(String),
    Neg(Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Let(String, Expr),
    Return(Expr),
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(name) => f.write_str(name),
            Expr::Neg(e) => write!(f, "-{e}"),
            Expr::Bin(op, l, r) => write!(f, "({l} {op} {r})"),
        }
    }
}

fn ops() -> &'static Arc<[Scalar]> {
    static OPS: OnceLock<Arc<[Scalar]>> = OnceLock::new();
    OPS.get_or_init(|| ["+", "-", "*", "/"].into_iter().map(Scalar::str).collect())
}

fn gen_expr(ctx: &mut GenContext<'_>, names: &Arc<[Scalar]>, depth: u32, unchecked: bool) -> Expr {
    let kind = ctx.choose_int("atom.kind", 0, 2);
    let mut e = if kind == 1 && !names.is_empty() {
        if unchecked && ctx.choose_int("atom.unchecked", 0, 10) == 0 {
            Expr::Var(format!("v{}", ctx.choose_int("atom.ghost", 0, 100)))
        } else {
            let v = ctx.choose_from("atom.var", names);
            Expr::Var(v.as_str().expect("names are strings").to_string())
        }
    } else {
        Expr::Lit(ctx.choose_int("atom.lit", 0, 10))
    };
    if depth < MAX_DEPTH {
        ctx.maybe("expr.bin", |ctx| {
            let op = ctx.choose_from("bin.op", ops());
            let op = op.as_str().expect("ops are strings").chars().next().expect("non-empty op");
            let rhs = gen_expr(ctx, names, depth + 1, unchecked);
            let lhs = std::mem::replace(&mut e, Expr::Lit(0));
            e = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        });
    }
    ctx.repeat("expr.neg", 3, |_, _| {
        let inner = std::mem::replace(&mut e, Expr::Lit(0));
        e = Expr::Neg(Box::new(inner));
    });
    e
}

pub fn generate_with(ctx: &mut GenContext<'_>, unchecked: bool) -> GeneratedInput {
    let mut names: Vec<Scalar> = Vec::new();
    let mut text = String::new();
    ctx.repeat("decls", 7, |ctx, _| {
        let name = format!("v{}", ctx.choose_int("decl.name", 0, 100));
        let visible: Arc<[Scalar]> = names.as_slice().into();
        let e = gen_expr(ctx, &visible, 0, unchecked);
        text.push_str(&format!("let {name} = {e};\n"));
        names.push(Scalar::str(&name));
    });
    let visible: Arc<[Scalar]> = names.as_slice().into();
    let e = gen_expr(ctx, &visible, 0, unchecked);
    text.push_str(&format!("return {e};\n"));
    GeneratedInput::chars(text)
}

pub fn generate(ctx: &mut GenContext<'_>) -> GeneratedInput {
    generate_with(ctx, false)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn eat(&mut self, lit: &str) -> Option<()> {
        if self.s[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            Some(())
        } else {
            None
        }
    }

    fn take_while(&mut self, f: impl Fn(u8) -> bool) -> &str {
        let start = self.pos;
        while self.pos < self.s.len() && f(self.s[self.pos]) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).expect("ascii")
    }

    fn ident(&mut self) -> Option<String> {
        if self.s.get(self.pos) != Some(&b'v') {
            return None;
        }
        self.pos += 1;
        let digits = self.take_while(|c| c.is_ascii_digit());
        if digits.is_empty() {
            return None;
        }
        Some(format!("v{digits}"))
    }

    fn expr(&mut self) -> Option<Expr> {
        match self.s.get(self.pos)? {
            b'-' => {
                self.pos += 1;
                Some(Expr::Neg(Box::new(self.expr()?)))
            }
            b'(' => {
                self.pos += 1;
                let l = self.expr()?;
                self.eat(" ")?;
                let op = *self.s.get(self.pos)? as char;
                if !"+-*/".contains(op) {
                    return None;
                }
                self.pos += 1;
                self.eat(" ")?;
                let r = self.expr()?;
                self.eat(")")?;
                Some(Expr::Bin(op, Box::new(l), Box::new(r)))
            }
            b'v' => self.ident().map(Expr::Var),
            c if c.is_ascii_digit() => self.take_while(|c| c.is_ascii_digit()).parse().ok().map(Expr::Lit),
            _ => None,
        }
    }
}

fn parse_stmt(line: &str) -> Option<Stmt> {
    let mut p = Parser {
        s: line.as_bytes(),
        pos: 0,
    };
    let stmt = if p.eat("let ").is_some() {
        let name = p.ident()?;
        p.eat(" = ")?;
        Stmt::Let(name, p.expr()?)
    } else {
        p.eat("return ")?;
        Stmt::Return(p.expr()?)
    };
    p.eat(";")?;
    (p.pos == p.s.len()).then_some(stmt)
}

/// Parses a program: declarations followed by exactly one return.
pub fn parse(text: &str) -> Result<Vec<Stmt>, String> {
    let mut stmts = Vec::new();
    for (k, line) in text.lines().enumerate() {
        stmts.push(parse_stmt(line).ok_or_else(|| format!("syntax error in statement {k}"))?);
    }
    match stmts.iter().position(|s| matches!(s, Stmt::Return(_))) {
        Some(i) if i + 1 == stmts.len() => Ok(stmts),
        _ => Err("program must end in its only return statement".into()),
    }
}

fn uses<'e>(e: &'e Expr, out: &mut Vec<&'e str>) {
    match e {
        Expr::Lit(_) => {}
        Expr::Var(n) => out.push(n),
        Expr::Neg(e) => uses(e, out),
        Expr::Bin(_, l, r) => {
            uses(l, out);
            uses(r, out);
        }
    }
}

/// Rejects uses of names not declared by an earlier statement.
pub fn check_definitions(stmts: &[Stmt]) -> Result<(), String> {
    let mut defined: HashSet<&str> = HashSet::new();
    for (k, stmt) in stmts.iter().enumerate() {
        let (name, e) = match stmt {
            Stmt::Let(n, e) => (Some(n.as_str()), e),
            Stmt::Return(e) => (None, e),
        };
        let mut used = Vec::new();
        uses(e, &mut used);
        if let Some(u) = used.into_iter().find(|u| !defined.contains(u)) {
            return Err(format!("undefined variable {u} in statement {k}"));
        }
        defined.extend(name);
    }
    Ok(())
}

/// The negation folding pass, with its injected defect.
fn fold_negations(e: &Expr, stmt: usize) -> Result<(), String> {
    match e {
        Expr::Neg(inner) => {
            if let Expr::Neg(inner2) = &**inner {
                if let Expr::Bin('/', _, _) = &**inner2 {
                    return Err(format!(
                        "internal error in fold_neg: double negation over quotient at stmt {stmt}"
                    ));
                }
            }
            fold_negations(inner, stmt)
        }
        Expr::Bin(_, l, r) => {
            fold_negations(l, stmt)?;
            fold_negations(r, stmt)
        }
        Expr::Lit(_) | Expr::Var(_) => Ok(()),
    }
}

fn eval(e: &Expr, env: &[(String, i64)]) -> Result<i64, String> {
    Ok(match e {
        Expr::Lit(v) => *v,
        Expr::Var(n) => env.iter().rev().find(|(k, _)| k == n).map(|(_, v)| *v).ok_or("unbound")?,
        Expr::Neg(e) => eval(e, env)?.wrapping_neg(),
        Expr::Bin(op, l, r) => {
            let (a, b) = (eval(l, env)?, eval(r, env)?);
            match op {
                '+' => a.wrapping_add(b),
                '-' => a.wrapping_sub(b),
                '*' => a.wrapping_mul(b),
                _ if b == 0 => return Err("runtime error: division by zero".into()),
                _ => a.wrapping_div(b),
            }
        }
    })
}

/// Compiles and runs a program, returning its value or an error message.
pub fn run(text: &str) -> Result<i64, String> {
    let stmts = parse(text)?;
    check_definitions(&stmts)?;
    for (k, stmt) in stmts.iter().enumerate() {
        let (Stmt::Let(_, e) | Stmt::Return(e)) = stmt;
        fold_negations(e, k)?;
    }
    let mut env = Vec::new();
    for stmt in &stmts {
        match stmt {
            Stmt::Let(n, e) => {
                let v = eval(e, &env)?;
                env.push((n.clone(), v));
            }
            Stmt::Return(e) => return eval(e, &env),
        }
    }
    unreachable!("parse guarantees a final return")
}

pub fn is_crash(message: &str) -> bool {
    message.starts_with("internal error")
}

/// Holds for inputs whose failure message is close to the original's
/// crash message; never holds if the original does not crash.
pub fn property_for(original: &GeneratedInput) -> Predicate {
    match run(&original.text) {
        Err(msg) if is_crash(&msg) => {
            let oracle = crash_oracle(SimilaritySpec::new(msg));
            Arc::new(move |text| matches!(run(text), Err(m) if oracle(&m)))
        }
        _ => Arc::new(|_| false),
    }
}

pub fn is_valid(text: &str) -> bool {
    parse(text).and_then(|s| check_definitions(&s)).is_ok()
}

pub fn measure(text: &str) -> Size {
    Size::Chars(text.chars().count())
}

fn spec(name: &'static str, summary: &'static str, id: &'static str, unchecked: bool) -> CaseSpec {
    CaseSpec {
        name,
        summary,
        generator: if unchecked {
            Arc::new(generator(id, |ctx: &mut GenContext<'_>| generate_with(ctx, true)))
        } else {
            Arc::new(generator(id, generate))
        },
        fixture_seed: FIXTURE_SEED,
        property: property_for,
        validity: is_valid,
        measure,
        dependency_bearing: true,
        tokenizer: Tokenizer::Lines,
        reducible: true,
    }
}

pub fn case() -> CaseSpec {
    spec(
        "expr",
        "straight-line integer programs with use-after-definition; bug: compiler crash on a quotient under two negations",
        ID,
        false,
    )
}

/// Variant that occasionally draws identifiers outside the declared set,
/// producing programs that use undefined variables.
pub fn unchecked_case() -> CaseSpec {
    spec(
        "expr-unchecked",
        "expr with occasional undeclared identifiers",
        ID_UNCHECKED,
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn print_parse_round_trip() {
        let e = Expr::Neg(Box::new(Expr::Neg(Box::new(Expr::Bin(
            '/',
            Box::new(Expr::Var("v3".into())),
            Box::new(Expr::Lit(2)),
        )))));
        let text = format!("let v3 = 4;\nreturn {e};\n");
        assert_eq!(text, "let v3 = 4;\nreturn --(v3 / 2);\n");
        let stmts = parse(&text).unwrap();
        assert_eq!(stmts[1], Stmt::Return(e));
    }

    #[test]
    fn compiler_outcomes() {
        assert_eq!(run("let v1 = (3 + 4);\nreturn -v1;\n"), Ok(-7));
        assert_eq!(
            run("return v1;\n"),
            Err("undefined variable v1 in statement 0".into())
        );
        assert_eq!(
            run("let v1 = 2;\nreturn --(v1 / 2);\n"),
            Err("internal error in fold_neg: double negation over quotient at stmt 1".into())
        );
        // One negation, or a negation between them, does not trigger it.
        assert_eq!(run("return -(4 / 2);\n"), Ok(-2));
        assert_eq!(run("return -(-(4 / 2) + 1);\n"), Ok(1));
        assert!(run("return (1 / 0);\n").unwrap_err().starts_with("runtime error"));
        assert!(run("let v1 = 1;\n").is_err());
        assert!(run("return 1;\nreturn 2;\n").is_err());
    }

    #[test]
    fn crash_variants_match_the_oracle() {
        let original = GeneratedInput::chars("let v1 = 1;\nlet v2 = 2;\nreturn --(v1 / v2);\n".into());
        let p = property_for(&original);
        assert!(p(&original.text));
        // Crash moved to statement 0: message differs in one character.
        assert!(p("return --(1 / 2);\n"));
        assert!(!p("return -(1 / 2);\n"));
        assert!(!p("return --(v9 / 2);\n"));
    }

    #[test]
    fn validity() {
        assert!(is_valid("let v1 = 1;\nreturn v1;\n"));
        assert!(is_valid("return --(1 / 0);\n"));
        assert!(!is_valid("return v1;\n"));
        assert!(!is_valid("let v1 = v1;\nreturn 1;\n"));
        assert!(!is_valid("return (1 +2);\n"));
    }
}
