//! Blocking JSON-over-HTTP with bounded retries, shared by the chat,
//! embedding and scoring clients.

use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("{url}: unreachable after {attempts} attempt(s): {message}")]
    Unreachable {
        url: String,
        attempts: u32,
        message: String,
    },
    #[error("{url}: HTTP {status} after {attempts} attempt(s): {body}")]
    Status {
        url: String,
        status: u16,
        attempts: u32,
        body: String,
    },
    #[error("{url}: malformed response: {message}")]
    Decode { url: String, message: String },
    #[error("replay: {0}")]
    Replay(String),
}

/// Retries on 429, 5xx and connection failures; other statuses fail at once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 2,
            base_backoff: Duration::from_millis(250),
        }
    }
}

impl RetryPolicy {
    fn backoff(&self, attempt: u32) -> Duration {
        self.base_backoff * 2u32.saturating_pow(attempt)
    }
}

fn retryable(status: StatusCode) -> bool {
    status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error()
}

/// A JSON endpoint client: base URL, optional bearer token and retry policy.
#[derive(Debug, Clone)]
pub struct JsonClient {
    client: Client,
    bearer: Option<String>,
    retry: RetryPolicy,
}

impl JsonClient {
    pub fn new(bearer: Option<String>, retry: RetryPolicy, timeout: Duration) -> Self {
        let client = Client::builder()
            .timeout(timeout)
            .build()
            .expect("TLS backend initialises");
        JsonClient {
            client,
            bearer,
            retry,
        }
    }

    /// Reads the bearer token from `env_var` when it is set and nonempty.
    pub fn from_env(env_var: &str, retry: RetryPolicy) -> Self {
        let bearer = std::env::var(env_var).ok().filter(|s| !s.is_empty());
        JsonClient::new(bearer, retry, Duration::from_secs(120))
    }

    /// POSTs `body` and decodes the 2xx response. Returns the decoded value
    /// and the number of HTTP requests issued (1 + retries).
    pub fn post<B: Serialize, R: DeserializeOwned>(
        &self,
        url: &str,
        body: &B,
    ) -> Result<(R, u32), TransportError> {
        let mut attempt = 0u32;
        loop {
            let mut req = self.client.post(url).json(body);
            if let Some(token) = &self.bearer {
                req = req.bearer_auth(token);
            }
            let attempts = attempt + 1;
            let can_retry = attempt < self.retry.max_retries;
            match req.send() {
                Ok(resp) if resp.status().is_success() => {
                    let text = resp.text().map_err(|e| TransportError::Decode {
                        url: url.to_string(),
                        message: e.to_string(),
                    })?;
                    let value = serde_json::from_str(&text).map_err(|e| TransportError::Decode {
                        url: url.to_string(),
                        message: e.to_string(),
                    })?;
                    return Ok((value, attempts));
                }
                Ok(resp) => {
                    let status = resp.status();
                    if !(can_retry && retryable(status)) {
                        return Err(TransportError::Status {
                            url: url.to_string(),
                            status: status.as_u16(),
                            attempts,
                            body: resp.text().unwrap_or_default(),
                        });
                    }
                    log::warn!("{url}: HTTP {status}, retrying");
                }
                Err(e) => {
                    if !can_retry {
                        return Err(TransportError::Unreachable {
                            url: url.to_string(),
                            attempts,
                            message: e.to_string(),
                        });
                    }
                    log::warn!("{url}: {e}, retrying");
                }
            }
            std::thread::sleep(self.retry.backoff(attempt));
            attempt += 1;
        }
    }
}

/// Joins a base URL and an endpoint path with exactly one slash.
pub fn join(base: &str, path: &str) -> String {
    format!("{}/{}", base.trim_end_matches('/'), path.trim_start_matches('/'))
}
