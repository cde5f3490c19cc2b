use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{HttpConfig, StubConfig};
use crate::mutate::{SchemeId, DEFAULT_MAX_DISTANCE};

pub const DEFAULT_THRESHOLD: usize = 9;
pub const MAX_THRESHOLD: usize = 9;
pub const DEFAULT_MAX_NEW_TOKENS: u32 = 128;
pub const DEFAULT_CONCURRENCY: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendSpec {
    Stub(StubConfig),
    Http(HttpConfig),
}

impl Default for BackendSpec {
    fn default() -> Self {
        BackendSpec::Stub(StubConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub seeds: PathBuf,
    pub backend: BackendSpec,
    pub threshold: usize,
    pub schemes: BTreeSet<SchemeId>,
    pub max_new_tokens: u32,
    pub concurrency: usize,
    pub cache_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed_limit: Option<usize>,
    pub max_distance: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            seeds: PathBuf::new(),
            backend: BackendSpec::default(),
            threshold: DEFAULT_THRESHOLD,
            schemes: SchemeId::ALL.into_iter().collect(),
            max_new_tokens: DEFAULT_MAX_NEW_TOKENS,
            concurrency: DEFAULT_CONCURRENCY,
            cache_dir: None,
            out_dir: None,
            seed_limit: None,
            max_distance: DEFAULT_MAX_DISTANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("threshold {0} outside 1..={MAX_THRESHOLD}")]
    Threshold(usize),
    #[error("no schemes enabled")]
    NoSchemes,
    #[error("concurrency must be at least 1")]
    Concurrency,
    #[error("max_new_tokens must be at least 1")]
    MaxNewTokens,
    #[error("max distance {0} outside [0, 1]")]
    MaxDistance(f64),
    #[error("http backend needs a url")]
    MissingUrl,
}

pub fn check_threshold(t: usize) -> Result<(), ConfigError> {
    if (1..=MAX_THRESHOLD).contains(&t) {
        Ok(())
    } else {
        Err(ConfigError::Threshold(t))
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_threshold(self.threshold)?;
        if self.schemes.is_empty() {
            return Err(ConfigError::NoSchemes);
        }
        if self.concurrency == 0 {
            return Err(ConfigError::Concurrency);
        }
        if self.max_new_tokens == 0 {
            return Err(ConfigError::MaxNewTokens);
        }
        if !(0.0..=1.0).contains(&self.max_distance) {
            return Err(ConfigError::MaxDistance(self.max_distance));
        }
        if let BackendSpec::Http(http) = &self.backend {
            if http.url.is_empty() {
                return Err(ConfigError::MissingUrl);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = CampaignConfig::default();
        assert_eq!(c.threshold, 9);
        assert_eq!(c.concurrency, 4);
        assert_eq!(c.schemes.len(), 10);
        assert_eq!(c.validate(), Ok(()));
    }

    #[test]
    fn rejects_bad_values() {
        for t in [0, 10] {
            let c = CampaignConfig {
                threshold: t,
                ..Default::default()
            };
            assert_eq!(c.validate(), Err(ConfigError::Threshold(t)));
        }
        let c = CampaignConfig {
            schemes: BTreeSet::new(),
            ..Default::default()
        };
        assert_eq!(c.validate(), Err(ConfigError::NoSchemes));
        let c = CampaignConfig {
            backend: BackendSpec::Http(HttpConfig::default()),
            ..Default::default()
        };
        assert_eq!(c.validate(), Err(ConfigError::MissingUrl));
    }
}
