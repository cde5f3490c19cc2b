//! Persistent response cache: one JSON file per request key.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CompletionBackend, CompletionOutcome, CompletionRequest, CompletionStatus, NoResultReason};

pub const CACHE_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    schema_version: u32,
    outcome: CompletionOutcome,
}

/// Hex SHA-256 of (backend id, prompt, max_new_tokens).
pub fn cache_key(backend_id: &str, request: &CompletionRequest) -> String {
    let mut h = Sha256::new();
    for part in [backend_id.as_bytes(), request.prompt.as_bytes()] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    h.update(request.max_new_tokens.to_le_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
}

pub struct CachedBackend<B> {
    inner: B,
    dir: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl<B: CompletionBackend> CachedBackend<B> {
    pub fn new(inner: B, dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            inner,
            dir,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
        }
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn load(&self, path: &Path) -> Option<CompletionOutcome> {
        let bytes = fs::read(path).ok()?;
        match serde_json::from_slice::<CacheEntry>(&bytes) {
            Ok(entry) if entry.schema_version == CACHE_SCHEMA_VERSION => Some(entry.outcome),
            _ => {
                log::warn!("ignoring corrupt cache entry {}", path.display());
                None
            }
        }
    }

    fn store(&self, path: &Path, outcome: &CompletionOutcome) -> std::io::Result<()> {
        let entry = CacheEntry {
            schema_version: CACHE_SCHEMA_VERSION,
            outcome: outcome.clone(),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(&serde_json::to_vec(&entry)?)?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    }
}

/// Transport failures may succeed on a later run, so they are not stored.
fn is_transient(status: &CompletionStatus) -> bool {
    matches!(
        status,
        CompletionStatus::NoResult {
            reason: NoResultReason::Timeout | NoResultReason::HttpError { .. }
        }
    )
}

impl<B: CompletionBackend> CompletionBackend for CachedBackend<B> {
    fn id(&self) -> String {
        self.inner.id()
    }

    fn complete(&self, request: &CompletionRequest) -> CompletionOutcome {
        let path = self.entry_path(&cache_key(&self.inner.id(), request));
        if let Some(mut outcome) = self.load(&path) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            outcome.case_ref = request.case_ref.clone();
            return outcome;
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let outcome = self.inner.complete(request);
        if !is_transient(&outcome.status) {
            if let Err(e) = self.store(&path, &outcome) {
                log::warn!("cache write to {} failed: {e}", path.display());
            }
        }
        outcome
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{CaseRef, StubBackend};
    use crate::mutate::SchemeId;

    struct Counting {
        calls: AtomicUsize,
        reply: CompletionStatus,
    }

    impl CompletionBackend for Counting {
        fn id(&self) -> String {
            "counting".into()
        }

        fn complete(&self, request: &CompletionRequest) -> CompletionOutcome {
            self.calls.fetch_add(1, Ordering::SeqCst);
            CompletionOutcome {
                case_ref: request.case_ref.clone(),
                status: self.reply.clone(),
                latency_ms: 5,
            }
        }
    }

    fn counting(reply: CompletionStatus) -> Counting {
        Counting {
            calls: AtomicUsize::new(0),
            reply,
        }
    }

    fn request(seed: &str, scheme: SchemeId) -> CompletionRequest {
        CompletionRequest {
            prompt: "def f(x):\n    y = x\n".into(),
            max_new_tokens: 32,
            case_ref: CaseRef {
                seed_id: seed.into(),
                scheme,
            },
        }
    }

    fn text(t: &str) -> CompletionStatus {
        CompletionStatus::Completed { text: t.into() }
    }

    #[test]
    fn second_request_is_a_hit() {
        let dir = tempfile::tempdir().unwrap();
        let cached = CachedBackend::new(counting(text("    return y")), dir.path()).unwrap();
        let a = cached.complete(&request("s", SchemeId::Original));
        let b = cached.complete(&request("s", SchemeId::Original));
        assert_eq!(a, b);
        assert_eq!(cached.inner().calls.load(Ordering::SeqCst), 1);
        assert_eq!(cached.stats(), CacheStats { hits: 1, misses: 1 });
    }

    #[test]
    fn hit_keeps_the_requesting_case_ref() {
        let dir = tempfile::tempdir().unwrap();
        let cached = CachedBackend::new(counting(text("    return y")), dir.path()).unwrap();
        cached.complete(&request("s", SchemeId::Original));
        let other = cached.complete(&request("t", SchemeId::RepR));
        assert_eq!(other.case_ref, request("t", SchemeId::RepR).case_ref);
        assert_eq!(cached.stats().hits, 1);
    }

    #[test]
    fn cleared_cache_reissues() {
        let dir = tempfile::tempdir().unwrap();
        let cached = CachedBackend::new(counting(text("    return y")), dir.path()).unwrap();
        cached.complete(&request("s", SchemeId::Original));
        for entry in fs::read_dir(dir.path()).unwrap() {
            fs::remove_file(entry.unwrap().path()).unwrap();
        }
        cached.complete(&request("s", SchemeId::Original));
        assert_eq!(cached.inner().calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn corrupt_entry_is_a_miss_and_overwritten() {
        let dir = tempfile::tempdir().unwrap();
        let cached = CachedBackend::new(counting(text("    return y")), dir.path()).unwrap();
        let req = request("s", SchemeId::Original);
        let path = cached.entry_path(&cache_key("counting", &req));
        fs::write(&path, b"{not json").unwrap();
        let out = cached.complete(&req);
        assert_eq!(out.completed_text(), Some("    return y"));
        assert_eq!(cached.inner().calls.load(Ordering::SeqCst), 1);
        let stored: serde_json::Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
        assert_eq!(stored["schema_version"], CACHE_SCHEMA_VERSION);
    }

    #[test]
    fn transient_failures_are_not_stored() {
        let dir = tempfile::tempdir().unwrap();
        let timeout = CompletionStatus::NoResult {
            reason: NoResultReason::Timeout,
        };
        let cached = CachedBackend::new(counting(timeout), dir.path()).unwrap();
        cached.complete(&request("s", SchemeId::Original));
        cached.complete(&request("s", SchemeId::Original));
        assert_eq!(cached.inner().calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn key_depends_on_backend_prompt_and_length() {
        let req = request("s", SchemeId::Original);
        let mut longer = req.clone();
        longer.max_new_tokens += 1;
        let mut other_prompt = req.clone();
        other_prompt.prompt.push(' ');
        let mut other_case = req.clone();
        other_case.case_ref.seed_id = "zzz".into();
        let k = cache_key("a", &req);
        assert_ne!(k, cache_key("b", &req));
        assert_ne!(k, cache_key("a", &longer));
        assert_ne!(k, cache_key("a", &other_prompt));
        assert_eq!(k, cache_key("a", &other_case));
    }

    #[test]
    fn stub_through_cache_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let stub = StubBackend::default();
        let cached = CachedBackend::new(stub.clone(), dir.path()).unwrap();
        let req = request("s", SchemeId::Ini);
        let direct = stub.complete(&req);
        assert_eq!(cached.complete(&req), direct);
        assert_eq!(cached.complete(&req), direct);
    }
}
