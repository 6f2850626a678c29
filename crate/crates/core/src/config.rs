//! TOML application config. API keys never live here; they are read from
//! `CHAT_API_KEY`, `EMBEDDINGS_API_KEY` and `VERIFIER_API_KEY`.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

use crate::gateway::{FrameTemplate, PromptTemplate, SamplingConfig, TemplateError, JUDGE_PLACEHOLDERS};
use crate::http::RetryPolicy;
use crate::retrieval::Bm25Params;
use crate::types::Strategy;

pub const DEFAULT_CONFIG: &str = "ttsfc.toml";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{field}: invalid URL {value:?}: {message}")]
    InvalidUrl {
        field: &'static str,
        value: String,
        message: String,
    },
    #[error("{field}: file {path} does not exist")]
    MissingFile { field: &'static str, path: PathBuf },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// Base URLs of the three external services.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Endpoints {
    pub chat: Option<String>,
    pub embeddings: Option<String>,
    #[serde(rename = "verifier-score", alias = "verifier_score")]
    pub verifier_score: Option<String>,
    pub embedding_model: Option<String>,
    /// Whether the chat endpoint honours `n > 1`.
    pub chat_supports_n: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bm25Section {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Section {
    fn default() -> Self {
        let p = Bm25Params::default();
        Bm25Section { k1: p.k1, b: p.b }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalSection {
    pub topk: usize,
    pub rerank_top: usize,
}

impl Default for RetrievalSection {
    fn default() -> Self {
        RetrievalSection { topk: 100, rerank_top: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategySection {
    pub kind: Strategy,
    pub m: u32,
    pub level0_m: u32,
    pub with_decomposition: bool,
    /// Send retrieved evidence to the verifier along with the path.
    pub score_with_evidence: bool,
}

impl Default for StrategySection {
    fn default() -> Self {
        StrategySection {
            kind: Strategy::AdaptiveBoN,
            m: 10,
            level0_m: 1,
            with_decomposition: false,
            score_with_evidence: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrySection {
    pub max_retries: u32,
    pub base_backoff_ms: u64,
    pub timeout_s: u64,
}

impl Default for RetrySection {
    fn default() -> Self {
        RetrySection {
            max_retries: 2,
            base_backoff_ms: 250,
            timeout_s: 120,
        }
    }
}

/// Layer range for the complexity classifier; all layers when unset.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexitySection {
    pub first_layer: Option<usize>,
    pub last_layer: Option<usize>,
}

/// Template overrides; bundled templates are used when unset.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub fact_check_template: Option<PathBuf>,
    pub decompose_template: Option<PathBuf>,
    pub judge_template: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub endpoints: Endpoints,
    pub sampling: SamplingConfig,
    pub bm25: Bm25Section,
    pub retrieval: RetrievalSection,
    pub strategy: StrategySection,
    pub retry: RetrySection,
    pub complexity: ComplexitySection,
    pub paths: Paths,
    pub jobs: Option<usize>,
}

fn check_url(field: &'static str, value: &Option<String>) -> Result<(), ConfigError> {
    let Some(v) = value else { return Ok(()) };
    let parsed = url::Url::parse(v).map_err(|e| ConfigError::InvalidUrl {
        field,
        value: v.clone(),
        message: e.to_string(),
    })?;
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(ConfigError::InvalidUrl {
            field,
            value: v.clone(),
            message: "scheme must be http or https".into(),
        });
    }
    Ok(())
}

impl AppConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let cfg: AppConfig = toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: origin.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `path`, or `./ttsfc.toml` when no path is given. A missing
    /// default file yields the defaults; a missing explicit file is an error.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let (path, explicit) = match path {
            Some(p) => (p.to_path_buf(), true),
            None => (PathBuf::from(DEFAULT_CONFIG), false),
        };
        if !explicit && !path.exists() {
            return Ok(AppConfig::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|e| ConfigError::Read {
            path: path.clone(),
            message: e.to_string(),
        })?;
        AppConfig::parse(&text, &path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check_url("endpoints.chat", &self.endpoints.chat)?;
        check_url("endpoints.embeddings", &self.endpoints.embeddings)?;
        check_url("endpoints.verifier-score", &self.endpoints.verifier_score)?;
        for (field, p) in [
            ("paths.fact_check_template", &self.paths.fact_check_template),
            ("paths.decompose_template", &self.paths.decompose_template),
            ("paths.judge_template", &self.paths.judge_template),
        ] {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(ConfigError::MissingFile { field, path: p.clone() });
                }
            }
        }
        self.sampling
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if (self.bm25.k1.is_nan() || self.bm25.k1 < 0.0) || !(0.0..=1.0).contains(&self.bm25.b) {
            return Err(ConfigError::Invalid(format!(
                "bm25: need k1 >= 0 and b in [0, 1], got k1={} b={}",
                self.bm25.k1, self.bm25.b
            )));
        }
        if self.jobs == Some(0) {
            return Err(ConfigError::Invalid("jobs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn bm25_params(&self) -> Bm25Params {
        Bm25Params {
            k1: self.bm25.k1,
            b: self.bm25.b,
        }
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.retry.max_retries,
            base_backoff: Duration::from_millis(self.retry.base_backoff_ms),
        }
    }

    pub fn fact_check_template(&self) -> Result<PromptTemplate, ConfigError> {
        Ok(match &self.paths.fact_check_template {
            Some(p) => PromptTemplate::load(p)?,
            None => PromptTemplate::fact_checking(),
        })
    }

    pub fn decompose_template(&self) -> Result<FrameTemplate, ConfigError> {
        Ok(match &self.paths.decompose_template {
            Some(p) => FrameTemplate::load(p, &["claim"])?,
            None => FrameTemplate::decomposition(),
        })
    }

    pub fn judge_template(&self) -> Result<FrameTemplate, ConfigError> {
        Ok(match &self.paths.judge_template {
            Some(p) => FrameTemplate::load(p, JUDGE_PLACEHOLDERS)?,
            None => FrameTemplate::judge(),
        })
    }
}
