//! Seed corpus ingestion and the prompt / ground-truth split.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::lexer::{count_tokens, TokenizeError};
use crate::syntax::{parse, sole_function, SyntaxTree};

pub const MIN_TOKENS: usize = 32;
pub const MAX_TOKENS: usize = 2048;

/// One Python function: the unit of testing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedProgram {
    pub id: String,
    pub source: String,
    pub function_name: String,
    pub token_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSplit {
    pub prompt: String,
    pub ground_truth: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read seed path {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("function body has {statements} top-level statement(s); need at least 2")]
    NotSplittable { statements: usize },
    #[error("seed does not parse: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SkipReason {
    Unreadable(String),
    MalformedRecord(String),
    Parse(String),
    NotSingleFunction(String),
    Tokenize(String),
    TooFewTokens(usize),
    TooManyTokens(usize),
    DuplicatePath(String),
    DuplicateId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkipRecord {
    /// File path, or `<jsonl path>:<line>` for JSONL input.
    pub origin: String,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    /// Sorted by id.
    pub seeds: Vec<SeedProgram>,
    pub skipped: Vec<SkipRecord>,
}

#[derive(Deserialize)]
struct SeedRecord {
    id: String,
    source: String,
    #[serde(default)]
    path: Option<String>,
}

/// Load seeds from a directory of `.py` files or from a JSONL file.
pub fn load_corpus(root: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let root = root.as_ref();
    let meta = fs::metadata(root).map_err(|source| CorpusError::Unreadable {
        path: root.to_path_buf(),
        source,
    })?;
    let mut corpus = if meta.is_dir() {
        load_dir(root)?
    } else {
        load_jsonl(root)?
    };
    corpus.seeds.sort_by(|a, b| a.id.cmp(&b.id));

    let mut seen = BTreeSet::new();
    let mut seeds = Vec::with_capacity(corpus.seeds.len());
    for seed in corpus.seeds {
        if seen.insert(seed.id.clone()) {
            seeds.push(seed);
        } else {
            corpus.skipped.push(SkipRecord {
                origin: seed.id,
                reason: SkipReason::DuplicateId,
            });
        }
    }
    corpus.seeds = seeds;

    for skip in &corpus.skipped {
        info!("skipped seed {}: {:?}", skip.origin, skip.reason);
    }
    if corpus.seeds.is_empty() {
        warn!("no usable seeds under {}", root.display());
    }
    Ok(corpus)
}

fn load_dir(root: &Path) -> Result<Corpus, CorpusError> {
    let mut corpus = Corpus::default();
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| CorpusError::Unreadable {
            path: e.path().unwrap_or(root).to_path_buf(),
            source: e
                .into_io_error()
                .unwrap_or_else(|| io::Error::other("directory walk failed")),
        })?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "py") {
            files.push(entry.into_path());
        }
    }

    for path in files {
        let rel = path
            .strip_prefix(root)
            .unwrap_or(&path)
            .to_string_lossy()
            .replace('\\', "/");
        let source = match fs::read(&path).map(String::from_utf8) {
            Ok(Ok(s)) => s,
            Ok(Err(e)) => {
                corpus.skipped.push(SkipRecord {
                    origin: rel,
                    reason: SkipReason::Unreadable(e.to_string()),
                });
                continue;
            }
            Err(e) => {
                corpus.skipped.push(SkipRecord {
                    origin: rel,
                    reason: SkipReason::Unreadable(e.to_string()),
                });
                continue;
            }
        };
        match validate(&source) {
            Ok((function_name, token_count)) => corpus.seeds.push(SeedProgram {
                id: format!("{rel}::{function_name}"),
                source,
                function_name,
                token_count,
            }),
            Err(reason) => corpus.skipped.push(SkipRecord { origin: rel, reason }),
        }
    }
    Ok(corpus)
}

fn load_jsonl(path: &Path) -> Result<Corpus, CorpusError> {
    let file = fs::File::open(path).map_err(|source| CorpusError::Unreadable {
        path: path.to_path_buf(),
        source,
    })?;
    let mut corpus = Corpus::default();
    let mut seen_paths = BTreeSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let origin = format!("{}:{}", path.display(), idx + 1);
        let line = line.map_err(|source| CorpusError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SeedRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                corpus.skipped.push(SkipRecord {
                    origin,
                    reason: SkipReason::MalformedRecord(e.to_string()),
                });
                continue;
            }
        };
        if let Some(p) = &record.path {
            if !seen_paths.insert(p.clone()) {
                corpus.skipped.push(SkipRecord {
                    origin,
                    reason: SkipReason::DuplicatePath(p.clone()),
                });
                continue;
            }
        }
        match validate(&record.source) {
            Ok((function_name, token_count)) => corpus.seeds.push(SeedProgram {
                id: record.id,
                source: record.source,
                function_name,
                token_count,
            }),
            Err(reason) => corpus.skipped.push(SkipRecord { origin, reason }),
        }
    }
    Ok(corpus)
}

/// Check one seed source; returns its function name and token count.
pub fn validate(source: &str) -> Result<(String, usize), SkipReason> {
    let tree = parse(source).map_err(|e| SkipReason::Parse(e.to_string()))?;
    let func = sole_function(&tree).map_err(|e| SkipReason::NotSingleFunction(e.to_string()))?;
    let statements = tree.top_level_statements();
    if statements.len() != 1 {
        return Err(SkipReason::NotSingleFunction(format!(
            "{} top-level statements besides the function",
            statements.len() - 1
        )));
    }
    let tokens = count_tokens(source).map_err(|e: TokenizeError| SkipReason::Tokenize(e.to_string()))?;
    if tokens < MIN_TOKENS {
        return Err(SkipReason::TooFewTokens(tokens));
    }
    if tokens > MAX_TOKENS {
        return Err(SkipReason::TooManyTokens(tokens));
    }
    let name = tree
        .child_by_field(func, "name")
        .map(|n| tree.text(n).to_string())
        .unwrap_or_default();
    Ok((name, tokens))
}

/// Split a seed's function into a prompt (signature plus the first half of
/// the body) and the remaining ground truth.
pub fn split_prompt(seed: &SeedProgram) -> Result<PromptSplit, SplitError> {
    let tree = parse(&seed.source).map_err(|e| SplitError::Invalid(e.to_string()))?;
    split_tree(&tree)
}

pub(crate) fn split_tree(tree: &SyntaxTree) -> Result<PromptSplit, SplitError> {
    let source = tree.source();
    let func = sole_function(tree).map_err(|e| SplitError::Invalid(e.to_string()))?;
    let body = tree
        .child_by_field(func, "body")
        .ok_or(SplitError::NotSplittable { statements: 0 })?;
    let stmts: Vec<_> = tree
        .named_children(body)
        .filter(|c| tree.kind(*c) != "comment")
        .collect();
    if stmts.len() < 2 {
        return Err(SplitError::NotSplittable {
            statements: stmts.len(),
        });
    }

    let first_row = tree.node(stmts[0]).start.row;
    let last_row = tree.node(*stmts.last().unwrap()).end.row;
    let body_lines = (last_row - first_row + 1) as f64;
    let half = body_lines / 2.0;

    // Boundary after statement i; strict `<` keeps the earliest on ties.
    let mut best = 0;
    let mut best_gap = f64::INFINITY;
    for (i, stmt) in stmts[..stmts.len() - 1].iter().enumerate() {
        let preceding = (tree.node(*stmt).end.row - first_row + 1) as f64;
        let gap = (preceding - half).abs();
        if gap < best_gap {
            best = i;
            best_gap = gap;
        }
    }

    let stmt = tree.node(stmts[best]);
    let next = tree.node(stmts[best + 1]);
    let mut cut = stmt.span.end;
    if next.start.row > stmt.end.row {
        // Take the rest of the line, including any trailing comment.
        cut = source[cut..]
            .find('\n')
            .map_or(source.len(), |i| cut + i + 1)
            .min(next.span.start);
    }
    Ok(PromptSplit {
        prompt: source[..cut].to_string(),
        ground_truth: source[cut..].to_string(),
    })
}
