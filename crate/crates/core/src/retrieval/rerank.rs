use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::bm25::sort_hits;
use super::embed::{EmbedError, EmbeddingProvider};
use super::EvidenceDoc;

#[derive(Debug, Error)]
pub enum RerankError {
    #[error("no candidates to rerank")]
    EmptyCandidates,
    #[error("embedding provider failed: {0}")]
    Provider(#[from] EmbedError),
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// One ranked evidence document. `text` travels with the hit so downstream
/// prompting does not need the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceHit {
    pub doc_id: String,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

/// Evidence for one claim, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEvidence {
    pub claim_id: String,
    pub hits: Vec<EvidenceHit>,
}

impl RankedEvidence {
    /// Hits with text, as documents for prompt rendering.
    pub fn documents(&self) -> Vec<EvidenceDoc> {
        self.hits
            .iter()
            .filter_map(|h| {
                h.text.as_ref().map(|t| EvidenceDoc {
                    doc_id: h.doc_id.clone(),
                    title: h.title.clone(),
                    text: t.clone(),
                })
            })
            .collect()
    }
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Orders `candidates` by cosine similarity between the claim and document
/// embeddings and keeps the best `top_k`.
pub fn rerank(
    claim_id: &str,
    claim: &str,
    candidates: &[EvidenceDoc],
    top_k: usize,
    provider: &dyn EmbeddingProvider,
) -> Result<RankedEvidence, RerankError> {
    if candidates.is_empty() {
        return Err(RerankError::EmptyCandidates);
    }
    let mut texts = Vec::with_capacity(candidates.len() + 1);
    texts.push(claim.to_string());
    texts.extend(candidates.iter().map(|d| d.text.clone()));
    let vectors = provider.embed(&texts)?;
    if vectors.len() != texts.len() {
        return Err(EmbedError::CountMismatch {
            expected: texts.len(),
            got: vectors.len(),
        }
        .into());
    }
    let dim = vectors[0].len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(RerankError::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    let query = &vectors[0];
    let mut scored: Vec<(String, f64)> = candidates
        .iter()
        .zip(&vectors[1..])
        .map(|(d, v)| (d.doc_id.clone(), cosine(query, v)))
        .collect();
    sort_hits(&mut scored);
    scored.truncate(top_k);
    let hits = scored
        .into_iter()
        .map(|(doc_id, score)| {
            let doc = candidates.iter().find(|d| d.doc_id == doc_id);
            EvidenceHit {
                title: doc.and_then(|d| d.title.clone()),
                text: doc.map(|d| d.text.clone()),
                doc_id,
                score,
            }
        })
        .collect();
    Ok(RankedEvidence {
        claim_id: claim_id.to_string(),
        hits,
    })
}
