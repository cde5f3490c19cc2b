//! Concrete syntax trees for Python source, scope queries over a seed's
//! function, and the structural distance used to validate mutants.

mod distance;
mod scope;
mod tree;

pub use distance::{distance_from_kinds, erased_kinds, lcs_len, structural_distance};
pub use scope::{analyze_scope, sole_function, AnalysisError, Identifier, ScopeInfo};
pub use tree::{parse, NodeId, ParseError, Point, Span, SyntaxNode, SyntaxTree};
