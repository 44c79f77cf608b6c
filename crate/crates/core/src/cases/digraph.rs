//! Directed graphs as edge lists. Node 0 always exists; up to 29 further
//! nodes are created by a loop, each optionally colored. Edge endpoints are
//! drawn from the ids of the nodes created so far, so removing a node makes
//! recorded endpoints invalid. The bug is a self-loop on a node reachable
//! from node 0.
//!
//! Format, one item per line: `n <id> [color]` then `e <src> <dst>`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use super::{CaseSpec, Predicate};
use crate::baselines::Tokenizer;
use crate::gen::{generator, GenContext, GeneratedInput, Size};
use crate::trace::Scalar;

pub const ID: &str = "digraph";

/// Five nodes and five edges with a self-loop on node 3.
pub const FIXTURE_SEED: u64 = 33;

const EXTRA_NODES: u32 = 29;

fn colors() -> &'static Arc<[Scalar]> {
    static COLORS: OnceLock<Arc<[Scalar]>> = OnceLock::new();
    COLORS.get_or_init(|| ["red", "green", "blue"].into_iter().map(Scalar::str).collect())
}

pub fn generate(ctx: &mut GenContext<'_>) -> GeneratedInput {
    let mut text = String::from("n 0\n");
    let mut nodes = 1i64;
    ctx.repeat("nodes", EXTRA_NODES, |ctx, _| {
        let id = nodes;
        nodes += 1;
        text.push_str(&format!("n {id}"));
        ctx.maybe("node.attr", |ctx| {
            let color = ctx.choose_from("node.color", colors());
            text.push(' ');
            text.push_str(color.as_str().expect("colors are strings"));
        });
        text.push('\n');
    });
    let ids: Arc<[Scalar]> = (0..nodes).map(Scalar::Int).collect();
    let edges = ctx.repeat("edges", 4 * nodes as u32, |ctx, _| {
        let src = ctx.choose_from("edge.src", &ids);
        let dst = ctx.choose_from("edge.dst", &ids);
        text.push_str(&format!("e {src} {dst}\n"));
    });
    GeneratedInput {
        text,
        size: Size::Graph {
            nodes: nodes as usize,
            edges: edges as usize,
        },
    }
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct Graph {
    pub nodes: Vec<i64>,
    pub edges: Vec<(i64, i64)>,
}

/// Parses the line format without checking that endpoints are defined.
pub fn parse(text: &str) -> Option<Graph> {
    let mut g = Graph::default();
    for line in text.lines() {
        let mut parts = line.split(' ');
        match parts.next()? {
            "n" => {
                g.nodes.push(parts.next()?.parse().ok()?);
                if let Some(color) = parts.next() {
                    if !matches!(color, "red" | "green" | "blue") {
                        return None;
                    }
                }
            }
            "e" => {
                let src = parts.next()?.parse().ok()?;
                let dst = parts.next()?.parse().ok()?;
                g.edges.push((src, dst));
            }
            _ => return None,
        }
        if parts.next().is_some() {
            return None;
        }
    }
    Some(g)
}

/// Some node reachable from node 0 has a self-loop.
pub fn property(text: &str) -> bool {
    let Some(g) = parse(text) else { return false };
    let mut succ: HashMap<i64, Vec<i64>> = HashMap::new();
    for &(s, d) in &g.edges {
        succ.entry(s).or_default().push(d);
    }
    let mut seen = vec![0i64];
    let mut stack = vec![0i64];
    while let Some(n) = stack.pop() {
        for &m in succ.get(&n).map(Vec::as_slice).unwrap_or(&[]) {
            if m == n {
                return true;
            }
            if !seen.contains(&m) {
                seen.push(m);
                stack.push(m);
            }
        }
    }
    false
}

/// Well-formed lines, node 0 present, unique node ids, every edge endpoint
/// a defined node.
pub fn is_valid(text: &str) -> bool {
    let Some(g) = parse(text) else { return false };
    let mut ids = g.nodes.clone();
    ids.sort_unstable();
    ids.dedup();
    ids.len() == g.nodes.len()
        && ids.first() == Some(&0)
        && g.edges
            .iter()
            .all(|(s, d)| ids.binary_search(s).is_ok() && ids.binary_search(d).is_ok())
}

/// Counts node and edge lines.
pub fn measure(text: &str) -> Size {
    let nodes = text.lines().filter(|l| l.starts_with("n ")).count();
    let edges = text.lines().filter(|l| l.starts_with("e ")).count();
    Size::Graph { nodes, edges }
}

pub fn case() -> CaseSpec {
    CaseSpec {
        name: "digraph",
        summary: "edge-list digraphs with endpoints drawn from created nodes; bug: self-loop reachable from node 0",
        generator: Arc::new(generator(ID, generate)),
        fixture_seed: FIXTURE_SEED,
        property: |_| -> Predicate { Arc::new(property) },
        validity: is_valid,
        measure,
        dependency_bearing: true,
        tokenizer: Tokenizer::Lines,
        reducible: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn property_cases() {
        assert!(property("n 0\ne 0 0\n"));
        assert!(property("n 0\nn 1\ne 0 1\ne 1 1\n"));
        assert!(!property("n 0\nn 1\ne 1 1\n"));
        assert!(!property("n 0\nn 1\ne 0 1\ne 1 0\n"));
        assert!(!property("junk\ne 0 0\n"));
        // Endpoints need not be defined for the bug to show.
        assert!(property("e 0 0\n"));
    }

    #[test]
    fn validity() {
        assert!(is_valid("n 0\n"));
        assert!(is_valid("n 0\nn 1 red\ne 1 0\n"));
        assert!(!is_valid("e 0 0\n"));
        assert!(!is_valid("n 0\ne 0 1\n"));
        assert!(!is_valid("n 0\nn 0\n"));
        assert!(!is_valid("n 0\nn 1 pink\n"));
    }

    #[test]
    fn measure_counts_lines() {
        assert_eq!(
            measure("n 0\nn 1 red\ne 1 0\n"),
            Size::Graph { nodes: 2, edges: 1 }
        );
    }
}
