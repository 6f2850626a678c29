use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::template::ChatMessage;
use crate::http::{join, JsonClient, RetryPolicy, TransportError};
use crate::jsonl;

/// One generation request. `n` asks for that many completions of the same
/// prompt in one call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub n: u32,
    pub max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub contents: Vec<String>,
    /// HTTP requests issued for this response, retries included.
    pub requests: u32,
}

/// Anything that turns chat messages into completions.
pub trait ChatProvider: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, TransportError>;

    /// Whether `n > 1` is honoured in a single request.
    fn supports_n(&self) -> bool {
        false
    }
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Client for an OpenAI-compatible `POST {base}/chat/completions` endpoint.
#[derive(Debug, Clone)]
pub struct HttpChat {
    url: String,
    client: JsonClient,
    supports_n: bool,
}

impl HttpChat {
    pub fn new(base: &str, client: JsonClient) -> Self {
        HttpChat {
            url: join(base, "chat/completions"),
            client,
            supports_n: true,
        }
    }

    /// Bearer token from `CHAT_API_KEY`.
    pub fn from_env(base: &str, retry: RetryPolicy) -> Self {
        HttpChat::new(base, JsonClient::from_env("CHAT_API_KEY", retry))
    }

    pub fn with_n_support(mut self, yes: bool) -> Self {
        self.supports_n = yes;
        self
    }
}

impl ChatProvider for HttpChat {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let (resp, requests): (WireResponse, u32) = self.client.post(&self.url, req)?;
        Ok(ChatResponse {
            contents: resp
                .choices
                .into_iter()
                .map(|c| c.message.content.unwrap_or_default())
                .collect(),
            requests,
        })
    }

    fn supports_n(&self) -> bool {
        self.supports_n
    }
}

/// One canned completion: `{"key_hash": ..., "seq": ..., "content": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub key_hash: String,
    pub seq: u64,
    pub content: String,
}

/// Key matching any prompt at a given sequence number.
pub const WILDCARD_KEY: &str = "*";

/// Offline chat provider serving canned completions.
///
/// Completions are keyed by a hash of the rendered messages plus a
/// per-prompt counter, so sampling the same prompt repeatedly walks through
/// `seq = 0, 1, 2, ...`. An entry with key `*` answers any prompt whose own
/// key has no entry at that sequence number.
#[derive(Debug, Default)]
pub struct ReplayTransport {
    entries: HashMap<(String, u64), String>,
    counters: Mutex<HashMap<String, u64>>,
    requests: Mutex<u64>,
    supports_n: bool,
}

impl ReplayTransport {
    pub fn new(entries: impl IntoIterator<Item = ReplayEntry>) -> Self {
        ReplayTransport {
            entries: entries
                .into_iter()
                .map(|e| ((e.key_hash, e.seq), e.content))
                .collect(),
            ..Default::default()
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TransportError> {
        let path = path.as_ref();
        let rows: Vec<ReplayEntry> =
            jsonl::read(path).map_err(|e| TransportError::Replay(e.to_string()))?;
        Ok(ReplayTransport::new(rows))
    }

    /// Answer `n > 1` requests in a single call.
    pub fn with_n_support(mut self, yes: bool) -> Self {
        self.supports_n = yes;
        self
    }

    /// Stable key of a message sequence: SHA-256 over its compact JSON.
    pub fn key_for(messages: &[ChatMessage]) -> String {
        let bytes = serde_json::to_vec(messages).expect("messages serialize");
        hex::encode(Sha256::digest(bytes))
    }

    /// Number of `complete` calls served so far.
    pub fn request_count(&self) -> u64 {
        *self.requests.lock().unwrap()
    }

    fn lookup(&self, key: &str, seq: u64) -> Option<&String> {
        self.entries
            .get(&(key.to_string(), seq))
            .or_else(|| self.entries.get(&(WILDCARD_KEY.to_string(), seq)))
    }
}

impl ChatProvider for ReplayTransport {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, TransportError> {
        let key = ReplayTransport::key_for(&req.messages);
        let n = u64::from(req.n.max(1));
        let start = {
            let mut counters = self.counters.lock().unwrap();
            let c = counters.entry(key.clone()).or_insert(0);
            let start = *c;
            *c += n;
            start
        };
        *self.requests.lock().unwrap() += 1;
        let contents = (start..start + n)
            .map(|seq| {
                self.lookup(&key, seq).cloned().ok_or_else(|| {
                    TransportError::Replay(format!("no fixture for key {key} seq {seq}"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChatResponse {
            contents,
            requests: 1,
        })
    }

    fn supports_n(&self) -> bool {
        self.supports_n
    }
}
