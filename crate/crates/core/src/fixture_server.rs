//! In-process HTTP server speaking the scoring, chat and embeddings wire
//! contracts from fixture data, so HTTP clients can be tested offline.
//!
//! Routes (`/v1` prefix optional for chat and embeddings):
//! - `POST /v1/score` — `{"items": [...]}` → `{"scores": [...]}`. Known
//!   items get their fixture score; unknown ones a stable hash-derived
//!   score in [0, 1).
//! - `POST /chat/completions` — answers from a replay table.
//! - `POST /embeddings` — answers from fixture vectors.
//!
//! Malformed JSON gets 400; well-formed bodies that break the schema (for
//! example an unknown verdict) get 422.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use tiny_http::{Header, Method, Request, Response, Server};

use crate::gateway::{ChatMessage, ChatProvider, ChatRequest, ReplayTransport};
use crate::retrieval::{EmbeddingProvider, FixtureEmbeddings};
use crate::verifier::ScoreRequest;

/// Data and behaviour of a fixture server.
#[derive(Default)]
pub struct Fixtures {
    pub scores: HashMap<String, f64>,
    pub chat: Option<ReplayTransport>,
    pub embeddings: Option<FixtureEmbeddings>,
    /// Answer this many requests with `fail_status` before serving normally.
    pub fail_first: u32,
    pub fail_status: u16,
}

impl Fixtures {
    pub fn with_failures(mut self, count: u32, status: u16) -> Self {
        self.fail_first = count;
        self.fail_status = status;
        self
    }
}

/// Stable pseudo-score for an item with no fixture entry.
pub fn fallback_score(key: &str) -> f64 {
    let digest = Sha256::digest(key.as_bytes());
    let head = u64::from_le_bytes(digest[..8].try_into().unwrap());
    (head >> 11) as f64 / (1u64 << 53) as f64
}

#[derive(Deserialize)]
struct WireChatRequest {
    #[serde(default)]
    model: String,
    messages: Vec<ChatMessage>,
    #[serde(default)]
    temperature: f64,
    #[serde(default)]
    n: Option<u32>,
    #[serde(default)]
    max_tokens: u32,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Deserialize)]
struct WireEmbeddingRequest {
    input: Vec<String>,
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

struct Reply {
    status: u16,
    body: String,
}

impl Reply {
    fn json(status: u16, value: &impl Serialize) -> Self {
        Reply {
            status,
            body: serde_json::to_string(value).expect("reply serializes"),
        }
    }

    fn error(status: u16, message: impl Into<String>) -> Self {
        Reply::json(status, &ErrorBody { error: message.into() })
    }
}

/// Two-stage decode: syntax errors are 400, schema errors 422.
fn decode<T: for<'de> Deserialize<'de>>(body: &str) -> Result<T, Reply> {
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| Reply::error(400, format!("malformed JSON: {e}")))?;
    serde_json::from_value(value).map_err(|e| Reply::error(422, e.to_string()))
}

fn route(fx: &Fixtures, method: &Method, path: &str, body: &str) -> Reply {
    if *method != Method::Post {
        return Reply::error(405, "only POST is supported");
    }
    let path = path.split('?').next().unwrap_or(path);
    let route = path.strip_prefix("/v1").unwrap_or(path);
    let result = match (path, route) {
        ("/v1/score", _) => score(fx, body),
        (_, "/chat/completions") => chat(fx, body),
        (_, "/embeddings") => embeddings(fx, body),
        _ => Err(Reply::error(404, format!("no route for {path}"))),
    };
    result.unwrap_or_else(|r| r)
}

fn score(fx: &Fixtures, body: &str) -> Result<Reply, Reply> {
    let req: ScoreRequest = decode(body)?;
    let scores: Vec<f64> = req
        .items
        .iter()
        .map(|it| {
            let key = it.key();
            fx.scores.get(&key).copied().unwrap_or_else(|| fallback_score(&key))
        })
        .collect();
    Ok(Reply::json(200, &json!({ "scores": scores })))
}

fn chat(fx: &Fixtures, body: &str) -> Result<Reply, Reply> {
    let replay = fx.chat.as_ref().ok_or_else(|| Reply::error(404, "no chat fixtures loaded"))?;
    let w: WireChatRequest = decode(body)?;
    let req = ChatRequest {
        model: w.model,
        messages: w.messages,
        temperature: w.temperature,
        n: w.n.unwrap_or(1).max(1),
        max_tokens: w.max_tokens,
        seed: w.seed,
    };
    let resp = replay.complete(&req).map_err(|e| Reply::error(422, e.to_string()))?;
    let choices: Vec<_> = resp
        .contents
        .iter()
        .enumerate()
        .map(|(i, c)| json!({"index": i, "message": {"role": "assistant", "content": c}, "finish_reason": "stop"}))
        .collect();
    Ok(Reply::json(200, &json!({ "object": "chat.completion", "choices": choices })))
}

fn embeddings(fx: &Fixtures, body: &str) -> Result<Reply, Reply> {
    let provider = fx
        .embeddings
        .as_ref()
        .ok_or_else(|| Reply::error(404, "no embedding fixtures loaded"))?;
    let w: WireEmbeddingRequest = decode(body)?;
    let vectors = provider.embed(&w.input).map_err(|e| Reply::error(422, e.to_string()))?;
    let data: Vec<_> = vectors
        .into_iter()
        .enumerate()
        .map(|(i, v)| json!({"object": "embedding", "index": i, "embedding": v}))
        .collect();
    Ok(Reply::json(200, &json!({ "object": "list", "data": data })))
}

/// A running fixture server; stops when dropped.
pub struct FixtureServer {
    server: Arc<Server>,
    port: u16,
    handled: Arc<AtomicU64>,
    worker: Option<JoinHandle<()>>,
}

impl FixtureServer {
    /// Binds to `addr` (use port 0 for an ephemeral port) and serves in a
    /// background thread.
    pub fn start(addr: &str, fixtures: Fixtures) -> std::io::Result<Self> {
        let server = Arc::new(Server::http(addr).map_err(std::io::Error::other)?);
        let port = server
            .server_addr()
            .to_ip()
            .map(|a| a.port())
            .ok_or_else(|| std::io::Error::other("not bound to an IP address"))?;
        let handled = Arc::new(AtomicU64::new(0));
        let failures = AtomicU32::new(fixtures.fail_first);
        let worker = {
            let server = Arc::clone(&server);
            let handled = Arc::clone(&handled);
            std::thread::spawn(move || {
                for req in server.incoming_requests() {
                    handled.fetch_add(1, Ordering::SeqCst);
                    let inject = failures
                        .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1))
                        .is_ok();
                    serve(&fixtures, req, inject);
                }
            })
        };
        Ok(FixtureServer {
            server,
            port,
            handled,
            worker: Some(worker),
        })
    }

    pub fn port(&self) -> u16 {
        self.port
    }

    /// Base URL, e.g. `http://127.0.0.1:PORT`.
    pub fn url(&self) -> String {
        format!("http://127.0.0.1:{}", self.port)
    }

    /// Requests received so far, injected failures included.
    pub fn requests(&self) -> u64 {
        self.handled.load(Ordering::SeqCst)
    }

    /// Serves until the process is killed.
    pub fn wait(mut self) {
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

fn serve(fx: &Fixtures, mut req: Request, inject_failure: bool) {
    let reply = if inject_failure {
        Reply::error(fx.fail_status, "injected failure")
    } else {
        let mut body = String::new();
        match req.as_reader().read_to_string(&mut body) {
            Ok(_) => route(fx, req.method(), req.url(), &body),
            Err(e) => Reply::error(400, format!("unreadable body: {e}")),
        }
    };
    let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
    let resp = Response::from_string(reply.body)
        .with_status_code(reply.status)
        .with_header(header);
    if let Err(e) = req.respond(resp) {
        log::warn!("fixture server: failed to respond: {e}");
    }
}
