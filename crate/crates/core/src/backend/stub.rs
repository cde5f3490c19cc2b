//! Deterministic local backend for tests and dry runs.
//!
//! The stub "model" reads the function header with identifiers and literals
//! erased, hashes it, and expands the hash into a small code template. Every
//! structure-consistent variant of a prompt shares that header shape, so a
//! fault-free stub answers all variants of a seed identically. Fault rules
//! then perturb chosen (seed, scheme) cases.

use std::collections::BTreeMap;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    status_from_text, CompletionBackend, CompletionOutcome, CompletionRequest, CompletionStatus,
    NoResultReason,
};
use crate::lexer::{tokenize, TokenKind};
use crate::mutate::SchemeId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaultAction {
    /// Replace the completion with hash-seeded noise of the same length.
    Scramble,
    /// Keep only the first line of the completion.
    Truncate,
    Replace { text: String },
    Empty,
    Timeout,
    HttpError { code: u16 },
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultRule {
    /// Matches every scheme when absent.
    #[serde(default)]
    pub scheme: Option<SchemeId>,
    /// Matches every seed when absent.
    #[serde(default)]
    pub seeds: Option<Vec<String>>,
    pub action: FaultAction,
}

impl FaultRule {
    pub fn for_scheme(scheme: SchemeId, action: FaultAction) -> Self {
        Self {
            scheme: Some(scheme),
            seeds: None,
            action,
        }
    }

    fn matches(&self, seed_id: &str, scheme: SchemeId) -> bool {
        self.scheme.is_none_or(|s| s == scheme)
            && self
                .seeds
                .as_ref()
                .is_none_or(|seeds| seeds.iter().any(|s| s == seed_id))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StubConfig {
    /// First matching rule wins.
    #[serde(default)]
    pub rules: Vec<FaultRule>,
    /// Canned completions keyed by [`StubBackend::prompt_key`]; they replace
    /// the template answer before any fault rule applies.
    #[serde(default)]
    pub answers: BTreeMap<String, String>,
    /// Upper bound of the reported latency; when `sleep` is set the stub
    /// actually waits that long.
    #[serde(default)]
    pub max_latency_ms: u64,
    #[serde(default)]
    pub sleep: bool,
}

#[derive(Debug, Clone, Default)]
pub struct StubBackend {
    config: StubConfig,
}

impl StubBackend {
    pub fn new(config: StubConfig) -> Self {
        Self { config }
    }

    pub fn with_rules(rules: Vec<FaultRule>) -> Self {
        Self::new(StubConfig {
            rules,
            ..Default::default()
        })
    }

    pub fn config(&self) -> &StubConfig {
        &self.config
    }

    /// Hex digest of the prompt's identifier-erased function header.
    pub fn prompt_key(prompt: &str) -> String {
        hex::encode(&Sha256::digest(erased_header(prompt).as_bytes())[..16])
    }

    /// The fault-free completion for `prompt`.
    pub fn template_completion(&self, prompt: &str) -> String {
        let key = Self::prompt_key(prompt);
        if let Some(answer) = self.config.answers.get(&key) {
            return answer.clone();
        }
        render_template(&Sha256::digest(erased_header(prompt).as_bytes()))
    }
}

/// Tokens of the `def` header line with names, numbers and strings erased.
/// The function name is kept: no scheme renames it, and it keeps distinct
/// seeds with the same signature shape apart.
fn erased_header(prompt: &str) -> String {
    let Ok(tokens) = tokenize(prompt) else {
        return prompt.to_string();
    };
    let start = tokens
        .iter()
        .position(|t| t.kind == TokenKind::Keyword && t.text(prompt) == "def")
        .unwrap_or(0);
    let mut out = Vec::new();
    for (i, tok) in tokens[start..].iter().enumerate() {
        match tok.kind {
            TokenKind::Newline => break,
            TokenKind::Name if i == 1 => out.push(tok.text(prompt)),
            TokenKind::Name => out.push("ID"),
            TokenKind::Number => out.push("NUM"),
            TokenKind::String => out.push("STR"),
            _ => out.push(tok.text(prompt)),
        }
    }
    out.join(" ")
}

fn render_template(digest: &[u8]) -> String {
    const NAMES: &[&str] = &["result", "total", "acc", "value", "out", "count"];
    const OPS: &[&str] = &["+", "-", "*", "^"];
    let pick = |i: usize, options: &[&'static str]| options[digest[i] as usize % options.len()];
    let var = pick(0, NAMES);
    let item = pick(1, &["item", "x", "elem", "node"]);
    let op = pick(2, OPS);
    let start = digest[3] % 10;
    let bound = 2 + digest[4] % 50;
    let step = 1 + digest[5] % 9;
    let mut text = format!(
        "    {var} = {start}\n    for {item} in range({bound}):\n        {var} = {var} {op} {item} * {step}\n"
    );
    if digest[6] % 2 == 0 {
        text.push_str(&format!("        if {var} > {}:\n            break\n", 100 + digest[7] as u32));
    }
    text.push_str(&format!("    return {var}\n"));
    text
}

fn scramble(text: &str, seed: &[u8]) -> String {
    const ALPHABET: &[u8] = b"qwertyuiopasdfghjklzxcvbnm{}[]<>!?#$%&";
    let mut state = Sha256::digest(seed);
    let mut out = String::with_capacity(text.len());
    for (i, c) in text.chars().enumerate() {
        if i % 32 == 0 && i > 0 {
            state = Sha256::digest(state);
        }
        if c == '\n' {
            out.push('\n');
        } else {
            out.push(ALPHABET[state[i % 32] as usize % ALPHABET.len()] as char);
        }
    }
    out
}

impl CompletionBackend for StubBackend {
    fn id(&self) -> String {
        let config = serde_json::to_vec(&self.config).expect("stub config serializes");
        format!("stub:{}", &hex::encode(Sha256::digest(config))[..16])
    }

    fn complete(&self, request: &CompletionRequest) -> CompletionOutcome {
        let case = &request.case_ref;
        let mut digest = Sha256::new();
        digest.update(request.prompt.as_bytes());
        digest.update(case.seed_id.as_bytes());
        digest.update(case.scheme.as_str().as_bytes());
        let case_hash = digest.finalize();

        let latency_ms = if self.config.max_latency_ms == 0 {
            0
        } else {
            u64::from_le_bytes(case_hash[..8].try_into().unwrap()) % (self.config.max_latency_ms + 1)
        };
        if self.config.sleep && latency_ms > 0 {
            thread::sleep(Duration::from_millis(latency_ms));
        }

        let answer = self.template_completion(&request.prompt);
        let rule = self
            .config
            .rules
            .iter()
            .find(|r| r.matches(&case.seed_id, case.scheme));
        let no_result = |reason| CompletionStatus::NoResult { reason };
        let status = match rule.map(|r| &r.action) {
            None => status_from_text(answer),
            Some(FaultAction::Scramble) => status_from_text(scramble(&answer, &case_hash)),
            Some(FaultAction::Truncate) => {
                status_from_text(answer.lines().next().unwrap_or("").to_string() + "\n")
            }
            Some(FaultAction::Replace { text }) => status_from_text(text.clone()),
            Some(FaultAction::Empty) => no_result(NoResultReason::Empty),
            Some(FaultAction::Timeout) => no_result(NoResultReason::Timeout),
            Some(FaultAction::HttpError { code }) => no_result(NoResultReason::HttpError { code: *code }),
            Some(FaultAction::Malformed) => no_result(NoResultReason::Malformed),
        };
        CompletionOutcome {
            case_ref: case.clone(),
            status,
            latency_ms,
        }
    }
}
