use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::template::ChatMessage;
use super::transport::{ChatProvider, ChatRequest};
use crate::http::TransportError;
use crate::parse::parse_response;
use crate::types::ReasoningPath;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("all {0} completions were unparseable")]
    AllPathsUnparseable(u32),
    #[error("invalid sampling config: {0}")]
    InvalidConfig(String),
}

/// Generation settings. Defaults: temperature 0.45, m = 10.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub model: String,
    pub temperature: f64,
    pub m: u32,
    pub max_tokens: u32,
    pub seed: Option<u64>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            model: "llama-3.1-8b-instruct".to_string(),
            temperature: 0.45,
            m: 10,
            max_tokens: 512,
            seed: None,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<(), SampleError> {
        if self.m == 0 {
            return Err(SampleError::InvalidConfig("m must be at least 1".into()));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(SampleError::InvalidConfig(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    /// Parsed paths in request-issue order.
    pub paths: Vec<ReasoningPath>,
    /// Completions requested (= m).
    pub completions: u32,
    /// HTTP requests actually issued, retries included.
    pub requests: u32,
    /// Completions dropped because they did not parse.
    pub unparseable: u32,
}

/// Draws `cfg.m` completions for `messages` and parses each into a path.
///
/// Uses one `n = m` request when the provider supports it, otherwise `m`
/// sequential single-completion requests. Unparseable completions are
/// logged and dropped.
pub fn sample_paths(
    messages: &[ChatMessage],
    cfg: &SamplingConfig,
    transport: &dyn ChatProvider,
) -> Result<SampleOutcome, SampleError> {
    cfg.validate()?;
    let request = |n: u32, seed: Option<u64>| ChatRequest {
        model: cfg.model.clone(),
        messages: messages.to_vec(),
        temperature: cfg.temperature,
        n,
        max_tokens: cfg.max_tokens,
        seed,
    };

    let mut contents = Vec::with_capacity(cfg.m as usize);
    let mut requests = 0u32;
    if transport.supports_n() && cfg.m > 1 {
        let resp = transport.complete(&request(cfg.m, cfg.seed))?;
        requests += resp.requests;
        contents.extend(resp.contents.into_iter().take(cfg.m as usize));
    } else {
        for i in 0..cfg.m {
            let resp = transport.complete(&request(1, cfg.seed.map(|s| s + u64::from(i))))?;
            requests += resp.requests;
            contents.extend(resp.contents.into_iter().take(1));
        }
    }

    let mut paths = Vec::with_capacity(contents.len());
    let mut unparseable = cfg.m - contents.len() as u32;
    for (i, raw) in contents.iter().enumerate() {
        match parse_response(raw) {
            Ok(p) => paths.push(p),
            Err(e) => {
                log::warn!("dropping completion {i}: {e}");
                unparseable += 1;
            }
        }
    }
    if paths.is_empty() {
        return Err(SampleError::AllPathsUnparseable(cfg.m));
    }
    Ok(SampleOutcome {
        paths,
        completions: cfg.m,
        requests,
        unparseable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{ReplayEntry, ReplayTransport, WILDCARD_KEY};
    use crate::types::Verdict;

    fn replay(contents: &[&str]) -> ReplayTransport {
        ReplayTransport::new(contents.iter().enumerate().map(|(i, c)| ReplayEntry {
            key_hash: WILDCARD_KEY.into(),
            seq: i as u64,
            content: c.to_string(),
        }))
    }

    fn cfg(m: u32) -> SamplingConfig {
        SamplingConfig {
            m,
            ..Default::default()
        }
    }

    fn msgs() -> Vec<ChatMessage> {
        vec![ChatMessage::user("claim")]
    }

    #[test]
    fn defaults() {
        let c = SamplingConfig::default();
        assert_eq!(c.temperature, 0.45);
        assert_eq!(c.m, 10);
    }

    #[test]
    fn single_canned_response() {
        let t = replay(&["[Label]: True\n[Justification]: ok"]);
        let out = sample_paths(&msgs(), &cfg(1), &t).unwrap();
        assert_eq!(out.paths.len(), 1);
        assert_eq!(out.paths[0].predicted, Verdict::True);
        assert_eq!(out.requests, 1);
    }

    #[test]
    fn nine_conflicting_one_true() {
        let mut c = vec!["[Label]: Conflicting\n[Justification]: figures differ"; 9];
        c.insert(4, "[Label]: True\n[Justification]: same amount in USD");
        let t = replay(&c);
        let out = sample_paths(&msgs(), &cfg(10), &t).unwrap();
        assert_eq!(out.paths.len(), 10);
        let conflicting = out.paths.iter().filter(|p| p.predicted == Verdict::Conflicting).count();
        assert_eq!(conflicting, 9);
        assert_eq!(out.paths[4].predicted, Verdict::True);
        assert_eq!(out.requests, 10);
        assert_eq!(t.request_count(), 10);
    }

    #[test]
    fn unparseable_completion_is_dropped() {
        let t = replay(&["[Label]: False", "garbage", "[Label]: True"]);
        let out = sample_paths(&msgs(), &cfg(3), &t).unwrap();
        assert_eq!(out.paths.len(), 2);
        assert_eq!(out.unparseable, 1);
        assert_eq!(out.completions, 3);
    }

    #[test]
    fn all_unparseable_is_an_error() {
        let t = replay(&["x", "y"]);
        assert!(matches!(
            sample_paths(&msgs(), &cfg(2), &t),
            Err(SampleError::AllPathsUnparseable(2))
        ));
    }

    #[test]
    fn batched_n_uses_one_request() {
        let t = replay(&["[Label]: False", "[Label]: True", "[Label]: True"]).with_n_support(true);
        let out = sample_paths(&msgs(), &cfg(3), &t).unwrap();
        assert_eq!(out.paths.len(), 3);
        assert_eq!(out.requests, 1);
        assert_eq!(t.request_count(), 1);
    }

    #[test]
    fn rejects_m_zero() {
        let t = replay(&[]);
        assert!(matches!(sample_paths(&msgs(), &cfg(0), &t), Err(SampleError::InvalidConfig(_))));
    }
}
