use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Half-open byte range into the parsed source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub(crate) usize);

/// Zero-based row/column (column in bytes), as reported by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Point {
    pub row: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub struct SyntaxNode {
    pub kind: &'static str,
    pub span: Span,
    pub start: Point,
    pub end: Point,
    pub named: bool,
    /// Grammar field under which this node hangs off its parent.
    pub field: Option<&'static str>,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    subtree_end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct ParseError {
    /// One-based.
    pub line: usize,
    /// One-based, in bytes.
    pub column: usize,
    pub offset: usize,
    pub message: String,
}

/// A lossless concrete syntax tree stored as an arena in preorder.
#[derive(Debug, Clone)]
pub struct SyntaxTree {
    source: String,
    nodes: Vec<SyntaxNode>,
}

static PYTHON: LazyLock<tree_sitter::Language> =
    LazyLock::new(|| tree_sitter_python::LANGUAGE.into());

/// Parse Python source. Any error or missing node makes the whole parse fail.
pub fn parse(source: &str) -> Result<SyntaxTree, ParseError> {
    let mut parser = tree_sitter::Parser::new();
    parser
        .set_language(&PYTHON)
        .expect("bundled grammar is ABI compatible");
    let ts_tree = parser
        .parse(source, None)
        .expect("parse without timeout or cancellation always yields a tree");
    let root = ts_tree.root_node();
    if root.has_error() {
        return Err(first_error(root, source));
    }

    let mut nodes = Vec::with_capacity(root.descendant_count());
    let mut cursor = root.walk();
    build(&mut cursor, None, &mut nodes);
    Ok(SyntaxTree {
        source: source.to_string(),
        nodes,
    })
}

fn build(
    cursor: &mut tree_sitter::TreeCursor<'_>,
    parent: Option<NodeId>,
    nodes: &mut Vec<SyntaxNode>,
) -> NodeId {
    let node = cursor.node();
    let id = NodeId(nodes.len());
    let to_point = |p: tree_sitter::Point| Point {
        row: p.row,
        column: p.column,
    };
    nodes.push(SyntaxNode {
        kind: PYTHON.node_kind_for_id(node.kind_id()).unwrap_or("ERROR"),
        span: Span::new(node.start_byte(), node.end_byte()),
        start: to_point(node.start_position()),
        end: to_point(node.end_position()),
        named: node.is_named(),
        field: cursor
            .field_id()
            .and_then(|f| PYTHON.field_name_for_id(f.get())),
        parent,
        children: Vec::new(),
        subtree_end: 0,
    });
    if cursor.goto_first_child() {
        loop {
            let child = build(cursor, Some(id), nodes);
            nodes[id.0].children.push(child);
            if !cursor.goto_next_sibling() {
                break;
            }
        }
        cursor.goto_parent();
    }
    nodes[id.0].subtree_end = nodes.len();
    id
}

fn first_error(root: tree_sitter::Node<'_>, source: &str) -> ParseError {
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if node.is_error() || node.is_missing() {
            let pos = node.start_position();
            let message = if node.is_missing() {
                format!("missing {:?}", node.kind())
            } else {
                let end = node.end_byte().min(node.start_byte() + 20);
                let text = source.get(node.start_byte()..end).unwrap_or("");
                format!("unexpected {text:?}")
            };
            return ParseError {
                line: pos.row + 1,
                column: pos.column + 1,
                offset: node.start_byte(),
                message,
            };
        }
        if node.has_error() {
            let mut cursor = node.walk();
            let children: Vec<_> = node.children(&mut cursor).collect();
            stack.extend(children.into_iter().rev());
        }
    }
    ParseError {
        line: 1,
        column: 1,
        offset: 0,
        message: "unrecognized syntax error".into(),
    }
}

impl SyntaxTree {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &SyntaxNode {
        &self.nodes[id.0]
    }

    pub fn kind(&self, id: NodeId) -> &'static str {
        self.nodes[id.0].kind
    }

    pub fn text(&self, id: NodeId) -> &str {
        let span = self.nodes[id.0].span;
        &self.source[span.start..span.end]
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0].children
    }

    pub fn named_children(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.children(id)
            .iter()
            .copied()
            .filter(|c| self.nodes[c.0].named)
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.0].parent
    }

    pub fn child_by_field(&self, id: NodeId, field: &str) -> Option<NodeId> {
        self.children(id)
            .iter()
            .copied()
            .find(|c| self.nodes[c.0].field == Some(field))
    }

    /// All nodes in preorder. The arena is built in preorder so this is
    /// simply index order.
    pub fn preorder(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    /// Preorder traversal of the subtree rooted at `id` (inclusive).
    pub fn descendants(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        (id.0..self.nodes[id.0].subtree_end).map(NodeId)
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.preorder()
            .filter(|id| self.nodes[id.0].children.is_empty())
    }

    /// Rebuild the source from leaf tokens and the inter-token gaps.
    pub fn reserialize(&self) -> String {
        let mut out = String::with_capacity(self.source.len());
        let mut cursor = 0;
        for leaf in self.leaves() {
            let span = self.nodes[leaf.0].span;
            if span.start < cursor {
                continue;
            }
            out.push_str(&self.source[cursor..span.start]);
            out.push_str(&self.source[span.start..span.end]);
            cursor = span.end;
        }
        out.push_str(&self.source[cursor..]);
        out
    }

    /// Source bytes not covered by any leaf token, as (offset, text) pairs.
    pub fn gaps(&self) -> Vec<(usize, &str)> {
        let mut gaps = Vec::new();
        let mut cursor = 0;
        for leaf in self.leaves() {
            let span = self.nodes[leaf.0].span;
            if span.start > cursor {
                gaps.push((cursor, &self.source[cursor..span.start]));
            }
            cursor = cursor.max(span.end);
        }
        if cursor < self.source.len() {
            gaps.push((cursor, &self.source[cursor..]));
        }
        gaps
    }

    /// Function definitions directly at module level, unwrapping decorators.
    pub fn top_level_functions(&self) -> Vec<NodeId> {
        self.named_children(self.root())
            .filter_map(|c| match self.kind(c) {
                "function_definition" => Some(c),
                "decorated_definition" => self
                    .child_by_field(c, "definition")
                    .filter(|d| self.kind(*d) == "function_definition"),
                _ => None,
            })
            .collect()
    }

    /// Top-level statements other than comments.
    pub fn top_level_statements(&self) -> Vec<NodeId> {
        self.named_children(self.root())
            .filter(|c| self.kind(*c) != "comment")
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_function() {
        let tree = parse("def f(a): return a").unwrap();
        let funcs = tree.top_level_functions();
        assert_eq!(funcs.len(), 1);
        let params = tree.child_by_field(funcs[0], "parameters").unwrap();
        let names: Vec<_> = tree.named_children(params).map(|p| tree.text(p)).collect();
        assert_eq!(names, ["a"]);
    }

    #[test]
    fn malformed_input_reports_location() {
        let err = parse("def f(:").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.column, 7);
        assert_eq!(err.offset, 6);
    }

    #[test]
    fn error_on_later_line() {
        let err = parse("def f(a):\n    return a +\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn spans_nest_and_round_trip() {
        let src = "def f(a, b=2):\n    # note\n    x = [i for i in a]  # tail\n    return x, b\n";
        let tree = parse(src).unwrap();
        for id in tree.preorder() {
            if let Some(p) = tree.parent(id) {
                assert!(tree.node(p).span.contains(&tree.node(id).span));
            }
        }
        assert_eq!(tree.reserialize(), src);
        for (_, gap) in tree.gaps() {
            assert!(gap.chars().all(char::is_whitespace), "gap {gap:?}");
        }
    }

    #[test]
    fn descendants_cover_subtree_only() {
        let tree = parse("def f(a):\n    return a\nx = 1\n").unwrap();
        let f = tree.top_level_functions()[0];
        let kinds: Vec<_> = tree.descendants(f).map(|d| tree.kind(d)).collect();
        assert_eq!(kinds.first(), Some(&"function_definition"));
        assert!(!kinds.contains(&"assignment"));
    }
}
