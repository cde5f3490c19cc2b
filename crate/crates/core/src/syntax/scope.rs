//! Name resolution for the single function of a seed.
//!
//! Python scoping is lexical and function-level: a name is local to a function
//! when the function binds it anywhere in its body (and does not declare it
//! `global`/`nonlocal`). Nested functions, lambdas, comprehensions and class
//! bodies open new scopes; an occurrence inside one of those belongs to the
//! outer binding only when the inner scope does not bind the same name.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use super::tree::{NodeId, Span, SyntaxTree};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Identifier {
    pub name: String,
    pub declaration: Span,
    /// Every other occurrence resolving to this binding, in source order.
    pub usages: Vec<Span>,
}

impl Identifier {
    /// Declaration followed by usages.
    pub fn occurrences(&self) -> impl Iterator<Item = Span> + '_ {
        std::iter::once(self.declaration).chain(self.usages.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScopeInfo {
    pub function_name: String,
    /// Parameters in signature order.
    pub parameters: Vec<Identifier>,
    /// Locals ordered by their first occurrence.
    pub locals: Vec<Identifier>,
    /// Every identifier spelled anywhere in the tree, for fresh-name checks.
    pub all_names: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("expected exactly one top-level function, found none")]
    NoFunction,
    #[error("expected exactly one top-level function, found {0}")]
    MultipleFunctions(usize),
}

/// Single top-level function of `tree`, or an error when there are zero or
/// several.
pub fn sole_function(tree: &SyntaxTree) -> Result<NodeId, AnalysisError> {
    let funcs = tree.top_level_functions();
    match funcs.len() {
        0 => Err(AnalysisError::NoFunction),
        1 => Ok(funcs[0]),
        n => Err(AnalysisError::MultipleFunctions(n)),
    }
}

pub fn analyze_scope(tree: &SyntaxTree) -> Result<ScopeInfo, AnalysisError> {
    let func = sole_function(tree)?;
    let function_name = tree
        .child_by_field(func, "name")
        .map(|n| tree.text(n).to_string())
        .unwrap_or_default();

    let mut params: Vec<(String, Span)> = Vec::new();
    if let Some(p) = tree.child_by_field(func, "parameters") {
        collect_parameters(tree, p, &mut params);
    }
    let param_names: HashSet<&str> = params.iter().map(|(n, _)| n.as_str()).collect();

    let body = tree.child_by_field(func, "body");
    let bindings = body.map(|b| scope_bindings(tree, b)).unwrap_or_default();

    let local_names: BTreeSet<String> = bindings
        .bound
        .iter()
        .filter(|n| !param_names.contains(n.as_str()) && !bindings.is_excluded(n))
        .cloned()
        .collect();

    let mut occurrences: BTreeMap<String, Vec<Span>> = BTreeMap::new();
    if let Some(body) = body {
        let shadowed = HashSet::new();
        collect_occurrences(tree, body, &shadowed, &mut |name, span| {
            if param_names.contains(name) || local_names.contains(name) {
                occurrences.entry(name.to_string()).or_default().push(span);
            }
        });
    }

    let parameters = params
        .iter()
        .filter(|(name, _)| !bindings.is_excluded(name))
        .map(|(name, decl)| Identifier {
            name: name.clone(),
            declaration: *decl,
            usages: occurrences.get(name).cloned().unwrap_or_default(),
        })
        .collect();

    let mut locals: Vec<Identifier> = local_names
        .iter()
        .filter_map(|name| {
            let spans = occurrences.get(name)?;
            let (first, rest) = spans.split_first()?;
            Some(Identifier {
                name: name.clone(),
                declaration: *first,
                usages: rest.to_vec(),
            })
        })
        .collect();
    locals.sort_by_key(|l| l.declaration.start);

    let all_names = tree
        .preorder()
        .filter(|&id| tree.kind(id) == "identifier")
        .map(|id| tree.text(id).to_string())
        .collect();

    Ok(ScopeInfo {
        function_name,
        parameters,
        locals,
        all_names,
    })
}

fn collect_parameters(tree: &SyntaxTree, params: NodeId, out: &mut Vec<(String, Span)>) {
    for p in tree.named_children(params) {
        let ident = match tree.kind(p) {
            "identifier" => Some(p),
            "default_parameter" | "typed_default_parameter" => tree.child_by_field(p, "name"),
            "typed_parameter" => tree.named_children(p).next().and_then(|c| {
                if tree.kind(c) == "identifier" {
                    Some(c)
                } else {
                    first_identifier(tree, c)
                }
            }),
            "list_splat_pattern" | "dictionary_splat_pattern" => first_identifier(tree, p),
            _ => None,
        };
        if let Some(id) = ident {
            out.push((tree.text(id).to_string(), tree.node(id).span));
        }
    }
}

fn first_identifier(tree: &SyntaxTree, node: NodeId) -> Option<NodeId> {
    tree.named_children(node)
        .find(|c| tree.kind(*c) == "identifier")
}

#[derive(Debug, Default)]
struct Bindings {
    bound: BTreeSet<String>,
    globals: BTreeSet<String>,
    nonlocals: BTreeSet<String>,
    imports: BTreeSet<String>,
}

impl Bindings {
    /// Names that are neither renameable locals nor parameters.
    fn is_excluded(&self, name: &str) -> bool {
        self.globals.contains(name) || self.nonlocals.contains(name) || self.imports.contains(name)
    }

    /// Names this scope binds for itself (shadowing any outer binding).
    fn shadowing(&self) -> BTreeSet<String> {
        self.bound
            .iter()
            .chain(&self.imports)
            .chain(&self.globals)
            .filter(|n| !self.nonlocals.contains(*n))
            .cloned()
            .collect()
    }
}

const SCOPE_KINDS: &[&str] = &[
    "function_definition",
    "lambda",
    "class_definition",
    "list_comprehension",
    "set_comprehension",
    "dictionary_comprehension",
    "generator_expression",
];

fn is_scope(kind: &str) -> bool {
    SCOPE_KINDS.contains(&kind)
}

/// Names bound directly in the scope whose body is `node`, without entering
/// nested scopes (except for the names those nested scopes bind here).
fn scope_bindings(tree: &SyntaxTree, node: NodeId) -> Bindings {
    let mut out = Bindings::default();
    let mut stack = vec![node];
    while let Some(n) = stack.pop() {
        let kind = tree.kind(n);
        match kind {
            "function_definition" | "class_definition" if n != node => {
                if let Some(name) = tree.child_by_field(n, "name") {
                    out.bound.insert(tree.text(name).to_string());
                }
                continue;
            }
            "lambda" | "list_comprehension" | "set_comprehension" | "dictionary_comprehension"
            | "generator_expression"
                if n != node =>
            {
                continue
            }
            "global_statement" | "nonlocal_statement" => {
                let set = if kind == "global_statement" {
                    &mut out.globals
                } else {
                    &mut out.nonlocals
                };
                for c in tree.named_children(n) {
                    set.insert(tree.text(c).to_string());
                }
                continue;
            }
            "import_statement" | "import_from_statement" | "future_import_statement" => {
                for id in tree.descendants(n) {
                    if tree.kind(id) == "identifier" {
                        out.imports.insert(tree.text(id).to_string());
                    }
                }
                continue;
            }
            "assignment" | "augmented_assignment" | "for_statement" | "for_in_clause" => {
                if let Some(left) = tree.child_by_field(n, "left") {
                    binding_targets(tree, left, &mut out.bound);
                }
            }
            "as_pattern_target" => binding_targets(tree, n, &mut out.bound),
            "named_expression" => {
                if let Some(name) = tree.child_by_field(n, "name") {
                    out.bound.insert(tree.text(name).to_string());
                }
            }
            _ => {}
        }
        stack.extend(tree.children(n).iter().rev().copied());
    }
    out
}

/// Identifiers bound by an assignment-like target.
fn binding_targets(tree: &SyntaxTree, target: NodeId, out: &mut BTreeSet<String>) {
    match tree.kind(target) {
        "identifier" => {
            out.insert(tree.text(target).to_string());
        }
        "pattern_list" | "tuple_pattern" | "list_pattern" | "tuple" | "list"
        | "list_splat_pattern" | "parenthesized_expression" | "as_pattern_target"
        | "expression_list" | "list_splat" => {
            for c in tree.named_children(target) {
                binding_targets(tree, c, out);
            }
        }
        _ => {}
    }
}

/// Whether an `identifier` node is a variable reference (as opposed to an
/// attribute name, a keyword-argument name or part of an import path).
fn is_variable_reference(tree: &SyntaxTree, id: NodeId) -> bool {
    let node = tree.node(id);
    let Some(parent) = node.parent else {
        return true;
    };
    match (tree.kind(parent), node.field) {
        ("attribute", Some("attribute")) => false,
        ("keyword_argument", Some("name")) => false,
        ("dotted_name", _) | ("aliased_import", _) => false,
        ("global_statement", _) | ("nonlocal_statement", _) => true,
        _ => true,
    }
}

/// Walk `node`, reporting every variable occurrence that resolves to the
/// scope being walked (i.e. not captured by an inner binder in `shadowed`).
fn collect_occurrences(
    tree: &SyntaxTree,
    node: NodeId,
    shadowed: &HashSet<String>,
    sink: &mut dyn FnMut(&str, Span),
) {
    let kind = tree.kind(node);
    if kind == "identifier" {
        let name = tree.text(node);
        if !shadowed.contains(name) && is_variable_reference(tree, node) {
            sink(name, tree.node(node).span);
        }
        return;
    }
    if matches!(
        kind,
        "import_statement" | "import_from_statement" | "future_import_statement"
    ) {
        return;
    }
    if !is_scope(kind) {
        for &c in tree.children(node) {
            collect_occurrences(tree, c, shadowed, sink);
        }
        return;
    }

    match kind {
        "function_definition" | "lambda" => {
            // Name, decorators, defaults and annotations live in the
            // enclosing scope; the body opens a new one.
            let params = tree.child_by_field(node, "parameters");
            let body = tree.child_by_field(node, "body");
            let mut inner_bound = BTreeSet::new();
            if let Some(p) = params {
                let mut ps = Vec::new();
                collect_parameters(tree, p, &mut ps);
                inner_bound.extend(ps.into_iter().map(|(n, _)| n));
                for c in tree.named_children(p) {
                    for field in ["value", "type"] {
                        if let Some(v) = tree.child_by_field(c, field) {
                            collect_occurrences(tree, v, shadowed, sink);
                        }
                    }
                }
            }
            for &c in tree.children(node) {
                if Some(c) != params && Some(c) != body {
                    collect_occurrences(tree, c, shadowed, sink);
                }
            }
            if let Some(body) = body {
                if kind == "function_definition" {
                    let b = scope_bindings(tree, body);
                    inner_bound.extend(b.shadowing());
                    for n in &b.nonlocals {
                        inner_bound.remove(n);
                    }
                }
                let mut inner = shadowed.clone();
                inner.extend(inner_bound);
                collect_occurrences(tree, body, &inner, sink);
            }
        }
        "class_definition" => {
            let body = tree.child_by_field(node, "body");
            for &c in tree.children(node) {
                if Some(c) != body {
                    collect_occurrences(tree, c, shadowed, sink);
                }
            }
            if let Some(body) = body {
                let b = scope_bindings(tree, body);
                let mut inner = shadowed.clone();
                inner.extend(b.shadowing());
                collect_occurrences(tree, body, &inner, sink);
            }
        }
        _ => {
            // Comprehensions: the first iterable is evaluated outside.
            let clauses: Vec<NodeId> = tree
                .named_children(node)
                .filter(|c| tree.kind(*c) == "for_in_clause")
                .collect();
            let mut bound = BTreeSet::new();
            for &clause in &clauses {
                if let Some(left) = tree.child_by_field(clause, "left") {
                    binding_targets(tree, left, &mut bound);
                }
            }
            let outer_iter = clauses
                .first()
                .and_then(|c| tree.child_by_field(*c, "right"));
            let mut inner = shadowed.clone();
            inner.extend(bound);
            for d in tree.children(node).iter().copied() {
                if Some(d) == clauses.first().copied() {
                    for &cc in tree.children(d) {
                        if Some(cc) == outer_iter {
                            collect_occurrences(tree, cc, shadowed, sink);
                        } else {
                            collect_occurrences(tree, cc, &inner, sink);
                        }
                    }
                } else {
                    collect_occurrences(tree, d, &inner, sink);
                }
            }
        }
    }
}
