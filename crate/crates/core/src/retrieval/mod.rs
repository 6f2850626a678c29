//! Evidence retrieval: BM25 candidate search over an evidence corpus followed
//! by embedding-based reranking.

mod bm25;
mod embed;
mod persist;
mod rerank;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bm25::{build_index, idf, term_score, Bm25Index, Bm25Params, Posting};
pub use embed::{EmbedError, EmbeddingProvider, FixtureEmbeddings, HttpEmbeddings};
pub use persist::{load_index, read_index, save_index, write_index, PersistError};
pub use rerank::{cosine, rerank, EvidenceHit, RankedEvidence, RerankError};

#[derive(Debug, Error, PartialEq)]
pub enum IndexError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("document {0} has empty text")]
    EmptyDocument(String),
    #[error("duplicate doc_id {0}")]
    DuplicateDocId(String),
    #[error("corpus contains no indexable tokens")]
    NoTokens,
}

/// One evidence document from the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceDoc {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub text: String,
}

impl EvidenceDoc {
    pub fn new(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        EvidenceDoc {
            doc_id: doc_id.into(),
            title: None,
            text: text.into(),
        }
    }
}

/// Unicode-lowercases and splits on every non-alphanumeric character.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}
