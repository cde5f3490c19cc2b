//! Generic JSON-over-HTTP completion client.

use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{
    status_from_text, CompletionBackend, CompletionOutcome, CompletionRequest, CompletionStatus,
    NoResultReason,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    pub url: String,
    pub timeout_ms: u64,
    /// Extra attempts after the first failure.
    pub retries: u32,
    pub backoff_ms: u64,
    pub bearer_token: Option<String>,
    /// Minimum spacing between request starts; `0` disables the limit.
    pub min_interval_ms: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            url: String::new(),
            timeout_ms: 60_000,
            retries: 2,
            backoff_ms: 500,
            bearer_token: None,
            min_interval_ms: 0,
        }
    }
}

impl HttpConfig {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            ..Default::default()
        }
    }
}

#[derive(Serialize)]
struct RequestBody<'a> {
    prompt: &'a str,
    max_new_tokens: u32,
}

#[derive(Deserialize)]
struct ResponseBody {
    completion: String,
}

/// Spaces request starts at least `interval` apart across threads.
#[derive(Debug)]
pub(crate) struct RateLimiter {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub(crate) fn new(interval: Duration) -> Self {
        Self {
            interval,
            next: Mutex::new(None),
        }
    }

    pub(crate) fn acquire(&self) {
        if self.interval.is_zero() {
            return;
        }
        let wait = {
            let mut next = self.next.lock().unwrap();
            let now = Instant::now();
            let slot = next.map_or(now, |t| t.max(now));
            *next = Some(slot + self.interval);
            slot - now
        };
        if !wait.is_zero() {
            thread::sleep(wait);
        }
    }
}

pub struct HttpBackend {
    config: HttpConfig,
    client: reqwest::blocking::Client,
    limiter: RateLimiter,
}

enum Attempt {
    Done(CompletionStatus),
    Retry(NoResultReason),
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self, reqwest::Error> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()?;
        let limiter = RateLimiter::new(Duration::from_millis(config.min_interval_ms));
        Ok(Self {
            config,
            client,
            limiter,
        })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn attempt(&self, request: &CompletionRequest) -> Attempt {
        self.limiter.acquire();
        let mut builder = self.client.post(&self.config.url).json(&RequestBody {
            prompt: &request.prompt,
            max_new_tokens: request.max_new_tokens,
        });
        if let Some(token) = &self.config.bearer_token {
            builder = builder.bearer_auth(token);
        }
        let response = match builder.send() {
            Ok(r) => r,
            Err(e) if e.is_timeout() => return Attempt::Retry(NoResultReason::Timeout),
            Err(e) => {
                log::debug!("request to {} failed: {e}", self.config.url);
                return Attempt::Retry(NoResultReason::HttpError { code: 0 });
            }
        };
        let status = response.status();
        if status != reqwest::StatusCode::OK {
            let reason = NoResultReason::HttpError {
                code: status.as_u16(),
            };
            return if status.is_server_error() || status == reqwest::StatusCode::TOO_MANY_REQUESTS {
                Attempt::Retry(reason)
            } else {
                Attempt::Done(CompletionStatus::NoResult { reason })
            };
        }
        let bytes = match response.bytes() {
            Ok(b) => b,
            Err(e) if e.is_timeout() => return Attempt::Retry(NoResultReason::Timeout),
            Err(_) => return Attempt::Retry(NoResultReason::HttpError { code: 0 }),
        };
        Attempt::Done(match serde_json::from_slice::<ResponseBody>(&bytes) {
            Ok(body) => status_from_text(body.completion),
            Err(_) => CompletionStatus::NoResult {
                reason: NoResultReason::Malformed,
            },
        })
    }
}

impl CompletionBackend for HttpBackend {
    fn id(&self) -> String {
        format!("http:{}", self.config.url)
    }

    fn complete(&self, request: &CompletionRequest) -> CompletionOutcome {
        let started = Instant::now();
        let mut attempt = 0;
        let status = loop {
            match self.attempt(request) {
                Attempt::Done(status) => break status,
                Attempt::Retry(reason) if attempt >= self.config.retries => {
                    break CompletionStatus::NoResult { reason }
                }
                Attempt::Retry(_) => {
                    thread::sleep(Duration::from_millis(self.config.backoff_ms << attempt));
                    attempt += 1;
                }
            }
        };
        CompletionOutcome {
            case_ref: request.case_ref.clone(),
            status,
            latency_ms: started.elapsed().as_millis() as u64,
        }
    }
}
