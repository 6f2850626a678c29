use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::http::{join, JsonClient, RetryPolicy, TransportError};
use crate::jsonl::{self, JsonlError};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("embedding fixture has no vector for text {0:?}")]
    MissingFixture(String),
    #[error("provider returned {got} vectors for {expected} inputs")]
    CountMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Fixture(#[from] JsonlError),
}

/// Source of fixed-dimension text embeddings. Output order matches input order.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError>;
}

#[derive(Serialize)]
struct EmbeddingRequest<'a> {
    input: &'a [String],
    model: &'a str,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingItem>,
}

#[derive(Deserialize)]
struct EmbeddingItem {
    embedding: Vec<f64>,
}

/// Client for `POST {base}/embeddings`.
#[derive(Debug, Clone)]
pub struct HttpEmbeddings {
    url: String,
    model: String,
    client: JsonClient,
    batch_size: usize,
}

impl HttpEmbeddings {
    pub fn new(base: &str, model: impl Into<String>, client: JsonClient) -> Self {
        HttpEmbeddings {
            url: join(base, "embeddings"),
            model: model.into(),
            client,
            batch_size: 64,
        }
    }

    pub fn from_env(base: &str, model: impl Into<String>, retry: RetryPolicy) -> Self {
        HttpEmbeddings::new(base, model, JsonClient::from_env("EMBEDDINGS_API_KEY", retry))
    }

    pub fn with_batch_size(mut self, n: usize) -> Self {
        self.batch_size = n.max(1);
        self
    }
}

impl EmbeddingProvider for HttpEmbeddings {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch_size) {
            let body = EmbeddingRequest {
                input: chunk,
                model: &self.model,
            };
            let (resp, _): (EmbeddingResponse, _) = self.client.post(&self.url, &body)?;
            if resp.data.len() != chunk.len() {
                return Err(EmbedError::CountMismatch {
                    expected: chunk.len(),
                    got: resp.data.len(),
                });
            }
            out.extend(resp.data.into_iter().map(|d| d.embedding));
        }
        Ok(out)
    }
}

/// One fixture line: `{"text": ..., "embedding": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureVector {
    pub text: String,
    pub embedding: Vec<f64>,
}

/// Offline provider returning pre-recorded vectors keyed by exact text.
#[derive(Debug, Clone, Default)]
pub struct FixtureEmbeddings {
    vectors: HashMap<String, Vec<f64>>,
}

impl FixtureEmbeddings {
    pub fn new(entries: impl IntoIterator<Item = (String, Vec<f64>)>) -> Self {
        FixtureEmbeddings {
            vectors: entries.into_iter().collect(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbedError> {
        let rows: Vec<FixtureVector> = jsonl::read(path)?;
        Ok(FixtureEmbeddings::new(rows.into_iter().map(|r| (r.text, r.embedding))))
    }
}

impl EmbeddingProvider for FixtureEmbeddings {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, EmbedError> {
        texts
            .iter()
            .map(|t| {
                self.vectors
                    .get(t)
                    .cloned()
                    .ok_or_else(|| EmbedError::MissingFixture(t.chars().take(60).collect()))
            })
            .collect()
    }
}
