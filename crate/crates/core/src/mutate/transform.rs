//! Source-to-source rewrites behind each scheme. Every rewrite is a set of
//! non-overlapping byte-range replacements on the original text, so that
//! untouched regions (comments, formatting) survive byte-for-byte.

use std::collections::BTreeSet;

use crate::syntax::{analyze_scope, sole_function, NodeId, ScopeInfo, Span, SyntaxTree};

use super::{MutateError, SchemeId};

pub(crate) const REGULAR_PARAM: &str = "Param1";
pub(crate) const REGULAR_LOCAL: &str = "LocalVar1";
pub(crate) const TEMP_VAR: &str = "TempVar";

const IRR_OPERATORS: &[&str] = &["+=", "-=", "*=", "//="];

/// Right-hand sides that can be spliced after a binary operator verbatim.
const ATOMIC_KINDS: &[&str] = &[
    "identifier",
    "integer",
    "float",
    "string",
    "concatenated_string",
    "true",
    "false",
    "none",
    "call",
    "attribute",
    "subscript",
    "parenthesized_expression",
    "list",
    "dictionary",
    "set",
    "list_comprehension",
    "dictionary_comprehension",
    "set_comprehension",
    "generator_expression",
];

struct Edit {
    span: Span,
    text: String,
}

fn apply_edits(source: &str, mut edits: Vec<Edit>) -> String {
    edits.sort_by_key(|e| (e.span.start, e.span.end));
    let mut out = String::with_capacity(source.len() + 64);
    let mut cursor = 0;
    for e in edits {
        debug_assert!(e.span.start >= cursor, "overlapping edits");
        out.push_str(&source[cursor..e.span.start]);
        out.push_str(&e.text);
        cursor = e.span.end;
    }
    out.push_str(&source[cursor..]);
    out
}

/// First name derived from `base` that is not in `taken`.
pub(crate) fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|k| format!("{base}_{k}"))
        .find(|candidate| !taken.contains(candidate))
        .expect("unbounded suffix search")
}

pub(crate) struct Analysis<'t> {
    pub tree: &'t SyntaxTree,
    pub scope: ScopeInfo,
    pub func: NodeId,
}

impl<'t> Analysis<'t> {
    pub fn new(tree: &'t SyntaxTree) -> Result<Self, MutateError> {
        let func = sole_function(tree)?;
        let scope = analyze_scope(tree)?;
        Ok(Self { tree, scope, func })
    }

    fn within_function(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.tree.descendants(self.func)
    }

    pub fn first_compound_assignment(&self) -> Option<NodeId> {
        self.within_function().find(|&id| {
            self.tree.kind(id) == "augmented_assignment"
                && self
                    .tree
                    .child_by_field(id, "operator")
                    .is_some_and(|op| IRR_OPERATORS.contains(&self.tree.text(op)))
        })
    }

    pub fn first_if_condition(&self) -> Option<NodeId> {
        self.within_function()
            .filter(|&id| self.tree.kind(id) == "if_statement")
            .find_map(|id| self.tree.child_by_field(id, "condition"))
    }

    pub fn applicable(&self) -> BTreeSet<SchemeId> {
        let mut set: BTreeSet<SchemeId> = [
            SchemeId::Original,
            SchemeId::GraR,
            SchemeId::GraC,
            SchemeId::Ini,
        ]
        .into_iter()
        .collect();
        if !self.scope.parameters.is_empty() {
            set.extend([SchemeId::RepR, SchemeId::RepC]);
        }
        if !self.scope.locals.is_empty() {
            set.extend([SchemeId::RelR, SchemeId::RelC]);
        }
        if self.first_compound_assignment().is_some() {
            set.insert(SchemeId::Irr);
        }
        if self.first_if_condition().is_some() {
            set.insert(SchemeId::Rtf);
        }
        set
    }
}

/// Apply `scheme` to the function in `analysis`. `taken` holds every name
/// the result must not collide with.
pub(crate) fn rewrite(
    analysis: &Analysis<'_>,
    scheme: SchemeId,
    taken: &BTreeSet<String>,
) -> Result<String, MutateError> {
    let tree = analysis.tree;
    let source = tree.source();
    let func_name = &analysis.scope.function_name;
    let not_applicable = || MutateError::SchemeNotApplicable(scheme);

    let edits = match scheme {
        SchemeId::Original => Vec::new(),
        SchemeId::RepR | SchemeId::RepC => {
            let param = analysis.scope.parameters.first().ok_or_else(not_applicable)?;
            let base = if scheme == SchemeId::RepR {
                REGULAR_PARAM.to_string()
            } else {
                format!("{func_name}_{}", param.name)
            };
            rename(param.occurrences(), &fresh_name(&base, taken))
        }
        SchemeId::RelR | SchemeId::RelC => {
            let local = analysis.scope.locals.first().ok_or_else(not_applicable)?;
            let base = if scheme == SchemeId::RelR {
                REGULAR_LOCAL.to_string()
            } else {
                format!("{func_name}_{}", local.name)
            };
            rename(local.occurrences(), &fresh_name(&base, taken))
        }
        SchemeId::Irr => {
            let node = analysis.first_compound_assignment().ok_or_else(not_applicable)?;
            vec![expand_compound(tree, node)]
        }
        SchemeId::Rtf => {
            let cond = analysis.first_if_condition().ok_or_else(not_applicable)?;
            vec![Edit {
                span: tree.node(cond).span,
                text: format!("({}) and True", tree.text(cond)),
            }]
        }
        SchemeId::GraR => {
            let var = fresh_name(TEMP_VAR, taken);
            insert_first(analysis, &["if False:".to_string(), format!("\t{var} = 0")])?
        }
        SchemeId::GraC => {
            let var = fresh_name(&format!("{func_name}_{TEMP_VAR}"), taken);
            let lines = match analysis.scope.parameters.first() {
                Some(p) => [
                    format!("if {0} != {0}:", p.name),
                    format!("\t{var} = {}", p.name),
                ],
                None => ["if 1 != 1:".to_string(), format!("\t{var} = 0")],
            };
            insert_first(analysis, &lines)?
        }
        SchemeId::Ini => {
            let payload = serde_json::to_string(func_name).expect("string serializes");
            insert_first(analysis, &[format!("print({payload})")])?
        }
    };
    Ok(apply_edits(source, edits))
}

fn rename(spans: impl Iterator<Item = Span>, name: &str) -> Vec<Edit> {
    spans
        .map(|span| Edit {
            span,
            text: name.to_string(),
        })
        .collect()
}

fn expand_compound(tree: &SyntaxTree, node: NodeId) -> Edit {
    let left = tree.child_by_field(node, "left").expect("augmented assignment has a target");
    let op = tree.child_by_field(node, "operator").expect("checked by caller");
    let right = tree.child_by_field(node, "right").expect("augmented assignment has a value");
    let binary = tree.text(op).trim_end_matches('=');
    let rhs = if ATOMIC_KINDS.contains(&tree.kind(right)) {
        tree.text(right).to_string()
    } else {
        format!("({})", tree.text(right))
    };
    let target = tree.text(left);
    Edit {
        span: tree.node(node).span,
        text: format!("{target} = {target} {binary} {rhs}"),
    }
}

/// Insert `lines` as the first statement of the function body (after a
/// docstring, if any). A leading `\t` in a line stands for one extra level
/// of indentation in the body's own style.
fn insert_first(analysis: &Analysis<'_>, lines: &[String]) -> Result<Vec<Edit>, MutateError> {
    let tree = analysis.tree;
    let source = tree.source();
    let body = tree
        .child_by_field(analysis.func, "body")
        .ok_or(MutateError::SchemeNotApplicable(SchemeId::GraR))?;
    let stmts: Vec<NodeId> = tree
        .named_children(body)
        .filter(|c| tree.kind(*c) != "comment")
        .collect();
    let first = *stmts.first().ok_or(MutateError::SchemeNotApplicable(SchemeId::GraR))?;

    let line_start = |offset: usize| source[..offset].rfind('\n').map_or(0, |i| i + 1);
    let only_ws = |s: &str| s.chars().all(|c| c == ' ' || c == '\t');

    let colon = tree
        .children(analysis.func)
        .iter()
        .copied()
        .find(|&c| tree.kind(c) == ":" && !tree.node(c).named);
    let colon_row = colon.map_or(tree.node(body).start.row, |c| tree.node(c).end.row);
    let inline_body = tree.node(first).start.row == colon_row;

    if inline_body {
        // `def f(a): stmt` -> move the body onto its own lines.
        let def_line = line_start(tree.node(analysis.func).span.start);
        let def_indent: String = source[def_line..]
            .chars()
            .take_while(|c| *c == ' ' || *c == '\t')
            .collect();
        let unit = indent_unit(&def_indent);
        let indent = format!("{def_indent}{unit}");
        let colon_end = colon.map_or(tree.node(body).span.start, |c| tree.node(c).span.end);
        let mut text = String::from("\n");
        for line in lines {
            text.push_str(&render_line(line, &indent, unit));
            text.push('\n');
        }
        text.push_str(&indent);
        return Ok(vec![Edit {
            span: Span::new(colon_end, tree.node(first).span.start),
            text,
        }]);
    }

    let anchor = match stmts.as_slice() {
        [doc, next, ..] if is_docstring(tree, *doc) => {
            let after_doc = tree.node(*next).span.start;
            if only_ws(&source[line_start(after_doc)..after_doc]) {
                Some(*next)
            } else {
                // Docstring shares its line with code; go before both.
                Some(first)
            }
        }
        [doc] if is_docstring(tree, *doc) => None,
        _ => Some(first),
    };

    match anchor {
        Some(stmt) => {
            let start = tree.node(stmt).span.start;
            let ls = line_start(start);
            let indent = &source[ls..start];
            let unit = indent_unit(indent);
            let mut text = String::new();
            for line in lines {
                text.push_str(&render_line(line, indent, unit));
                text.push('\n');
            }
            Ok(vec![Edit {
                span: Span::new(ls, ls),
                text,
            }])
        }
        None => {
            // The docstring is the whole body: append right after it.
            let doc = first;
            let start = tree.node(doc).span.start;
            let indent = source[line_start(start)..start].to_string();
            let indent = if only_ws(&indent) { indent } else { "    ".to_string() };
            let unit = indent_unit(&indent);
            let mut text = String::new();
            for line in lines {
                text.push('\n');
                text.push_str(&render_line(line, &indent, unit));
            }
            let end = tree.node(doc).span.end;
            Ok(vec![Edit {
                span: Span::new(end, end),
                text,
            }])
        }
    }
}

fn render_line(line: &str, indent: &str, unit: &str) -> String {
    match line.strip_prefix('\t') {
        Some(rest) => format!("{indent}{unit}{rest}"),
        None => format!("{indent}{line}"),
    }
}

fn indent_unit(indent: &str) -> &'static str {
    if indent.starts_with('\t') {
        "\t"
    } else {
        "    "
    }
}

fn is_docstring(tree: &SyntaxTree, stmt: NodeId) -> bool {
    tree.kind(stmt) == "expression_statement"
        && tree
            .named_children(stmt)
            .map(|c| tree.kind(c))
            .collect::<Vec<_>>()
            == ["string"]
}
