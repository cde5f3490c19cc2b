//! Completion-system clients.
//!
//! A backend answers one prompt with at most one completion. Failures never
//! propagate as errors: they are folded into [`CompletionStatus::NoResult`]
//! so that a campaign always runs to the end.

mod cache;
mod dispatch;
mod http;
mod stub;

use serde::{Deserialize, Serialize};

use crate::mutate::SchemeId;

pub use cache::{cache_key, CacheStats, CachedBackend, CACHE_SCHEMA_VERSION};
pub use dispatch::dispatch;
pub use http::{HttpBackend, HttpConfig};
pub use stub::{FaultAction, FaultRule, StubBackend, StubConfig};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CaseRef {
    pub seed_id: String,
    pub scheme: SchemeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub max_new_tokens: u32,
    pub case_ref: CaseRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoResultReason {
    Timeout,
    Empty,
    HttpError { code: u16 },
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CompletionStatus {
    Completed { text: String },
    NoResult { reason: NoResultReason },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionOutcome {
    pub case_ref: CaseRef,
    pub status: CompletionStatus,
    pub latency_ms: u64,
}

impl CompletionOutcome {
    pub fn completed_text(&self) -> Option<&str> {
        match &self.status {
            CompletionStatus::Completed { text } => Some(text),
            CompletionStatus::NoResult { .. } => None,
        }
    }

    pub fn is_completed(&self) -> bool {
        self.completed_text().is_some()
    }
}

/// Build a status from raw completion text: empty text is a no-result.
pub(crate) fn status_from_text(text: String) -> CompletionStatus {
    if text.trim().is_empty() {
        CompletionStatus::NoResult {
            reason: NoResultReason::Empty,
        }
    } else {
        CompletionStatus::Completed { text }
    }
}

pub trait CompletionBackend: Send + Sync {
    /// Stable identity; part of the cache key.
    fn id(&self) -> String;

    fn complete(&self, request: &CompletionRequest) -> CompletionOutcome;
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for Box<B> {
    fn id(&self) -> String {
        (**self).id()
    }

    fn complete(&self, request: &CompletionRequest) -> CompletionOutcome {
        (**self).complete(request)
    }
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for std::sync::Arc<B> {
    fn id(&self) -> String {
        (**self).id()
    }

    fn complete(&self, request: &CompletionRequest) -> CompletionOutcome {
        (**self).complete(request)
    }
}
