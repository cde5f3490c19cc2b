//! Black-box testing and repair of code completion systems.
//!
//! Seed functions are split into a prompt and a ground truth, the prompt is
//! mutated with structure-consistent transformations, every variant is sent
//! to a completion backend, and the completions are cross-checked: outputs
//! that disagree with most of their peers are flagged as outliers, and the
//! most "typical" remaining output is returned as the repaired completion.

pub mod backend;
pub mod corpus;
pub mod harness;
pub mod lexer;
pub mod metrics;
pub mod mutate;
pub mod oracle;
pub mod repair;
pub mod syntax;
