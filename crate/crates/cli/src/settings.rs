use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

use probe_core::backend::{FaultRule, HttpConfig, StubConfig};
use probe_core::harness::{BackendSpec, CampaignConfig};
use probe_core::mutate::SchemeId;

/// Campaign settings shared by flags and the config file. A flag wins over
/// the same key in the file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Seed directory or JSONL file
    #[arg(long, value_name = "PATH")]
    pub seeds: Option<PathBuf>,
    /// `stub` or the URL of a completion endpoint
    #[arg(long, value_name = "URL|stub")]
    pub backend: Option<String>,
    /// JSON fault rules for the stub backend
    #[arg(long, value_name = "PATH")]
    pub fault_rules: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub threshold: Option<usize>,
    /// Comma-separated scheme ids, e.g. REP_R,GRA_C
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub schemes: Option<Vec<SchemeId>>,
    #[arg(long, value_name = "N")]
    pub max_new_tokens: Option<u32>,
    #[arg(long, value_name = "N")]
    pub concurrency: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub cache_dir: Option<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub seed_limit: Option<usize>,
    #[arg(long, value_name = "D")]
    pub max_distance: Option<f64>,
    #[arg(skip)]
    #[serde(default)]
    pub http: HttpOptions,
}

/// Client tuning, only settable from the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HttpOptions {
    pub timeout_ms: Option<u64>,
    pub retries: Option<u32>,
    pub backoff_ms: Option<u64>,
    pub min_interval_ms: Option<u64>,
    /// Name of the environment variable holding a bearer token.
    pub bearer_token_env: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FaultFile {
    Rules(Vec<FaultRule>),
    Stub(StubConfig),
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn over(self, file: Settings) -> Settings {
        Settings {
            seeds: self.seeds.or(file.seeds),
            backend: self.backend.or(file.backend),
            fault_rules: self.fault_rules.or(file.fault_rules),
            threshold: self.threshold.or(file.threshold),
            schemes: self.schemes.or(file.schemes),
            max_new_tokens: self.max_new_tokens.or(file.max_new_tokens),
            concurrency: self.concurrency.or(file.concurrency),
            cache_dir: self.cache_dir.or(file.cache_dir),
            out: self.out.or(file.out),
            seed_limit: self.seed_limit.or(file.seed_limit),
            max_distance: self.max_distance.or(file.max_distance),
            http: file.http,
        }
    }

    pub fn campaign(&self) -> Result<CampaignConfig> {
        let defaults = CampaignConfig::default();
        let Some(seeds) = self.seeds.clone() else {
            bail!("no seed corpus given (--seeds)");
        };
        let mut schemes = match &self.schemes {
            Some(list) => list.iter().copied().collect(),
            None => defaults.schemes.clone(),
        };
        schemes.insert(SchemeId::Original);
        let config = CampaignConfig {
            seeds,
            backend: self.backend_spec()?,
            threshold: self.threshold.unwrap_or(defaults.threshold),
            schemes,
            max_new_tokens: self.max_new_tokens.unwrap_or(defaults.max_new_tokens),
            concurrency: self.concurrency.unwrap_or(defaults.concurrency),
            cache_dir: self.cache_dir.clone(),
            out_dir: self.out.clone(),
            seed_limit: self.seed_limit,
            max_distance: self.max_distance.unwrap_or(defaults.max_distance),
        };
        config.validate()?;
        Ok(config)
    }

    fn backend_spec(&self) -> Result<BackendSpec> {
        let backend = self.backend.as_deref().unwrap_or("stub");
        if backend == "stub" {
            let stub = match &self.fault_rules {
                Some(path) => read_faults(path)?,
                None => StubConfig::default(),
            };
            return Ok(BackendSpec::Stub(stub));
        }
        if !(backend.starts_with("http://") || backend.starts_with("https://")) {
            bail!("backend must be `stub` or an http(s) URL, got `{backend}`");
        }
        if self.fault_rules.is_some() {
            bail!("--fault-rules only applies to the stub backend");
        }
        let mut http = HttpConfig::new(backend);
        let o = &self.http;
        http.timeout_ms = o.timeout_ms.unwrap_or(http.timeout_ms);
        http.retries = o.retries.unwrap_or(http.retries);
        http.backoff_ms = o.backoff_ms.unwrap_or(http.backoff_ms);
        http.min_interval_ms = o.min_interval_ms.unwrap_or(http.min_interval_ms);
        if let Some(var) = &o.bearer_token_env {
            let token = std::env::var(var).with_context(|| format!("bearer token variable {var} is not set"))?;
            http.bearer_token = Some(token);
        }
        Ok(BackendSpec::Http(http))
    }
}

fn read_faults(path: &Path) -> Result<StubConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed: FaultFile =
        serde_json::from_str(&text).with_context(|| format!("parsing fault rules {}", path.display()))?;
    Ok(match parsed {
        FaultFile::Rules(rules) => StubConfig { rules, ..Default::default() },
        FaultFile::Stub(stub) => stub,
    })
}
