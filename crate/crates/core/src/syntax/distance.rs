//! AST structural-consistency distance between a seed prompt and a mutant.

use super::tree::{NodeId, SyntaxTree};

/// Node kinds whose subtree is a single literal; their inner structure
/// (string contents, escape sequences) is treated as erased text.
const LITERAL_KINDS: &[&str] = &["string", "concatenated_string"];

/// Preorder sequence of node kinds with identifier and literal text erased.
///
/// Identifiers and numeric literals already carry no text in their kind;
/// string literals are collapsed to a single node and comments are dropped.
pub fn erased_kinds(tree: &SyntaxTree) -> Vec<&'static str> {
    let mut out = Vec::with_capacity(tree.len());
    let mut stack: Vec<NodeId> = vec![tree.root()];
    while let Some(id) = stack.pop() {
        let kind = tree.kind(id);
        if kind == "comment" {
            continue;
        }
        out.push(kind);
        if LITERAL_KINDS.contains(&kind) {
            continue;
        }
        stack.extend(tree.children(id).iter().rev().copied());
    }
    out
}

/// Length of the longest common subsequence, two-row dynamic programme.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - m/n`, where `n` is the seed's erased-kind sequence length and `m`
/// the LCS length against the mutant's.
pub fn structural_distance(seed: &SyntaxTree, mutant: &SyntaxTree) -> f64 {
    distance_from_kinds(&erased_kinds(seed), &erased_kinds(mutant))
}

pub fn distance_from_kinds(seed: &[&str], mutant: &[&str]) -> f64 {
    if seed.is_empty() {
        return if mutant.is_empty() { 0.0 } else { 1.0 };
    }
    let m = lcs_len(seed, mutant);
    1.0 - m as f64 / seed.len() as f64
}
