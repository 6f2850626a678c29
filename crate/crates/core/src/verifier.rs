//! Verifier training data and path scoring.
//!
//! Every sampled path becomes one labelled example: label 1 when its verdict
//! matches the claim's gold verdict, 0 otherwise. At inference time the
//! scoring service returns a plausibility score in `[0, 1]` per path.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::http::{join, JsonClient, RetryPolicy, TransportError};
use crate::jsonl::{self, JsonlError};
use crate::types::{ClaimRecord, ReasoningPath, RunRecord, Verdict};

#[derive(Debug, Error)]
pub enum VerifierError {
    #[error("no gold verdict for claim {0}")]
    MissingGold(String),
}

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("scorer returned {got} scores for {expected} paths")]
    CountMismatch { expected: usize, got: usize },
    #[error("no paths to score")]
    EmptyPaths,
    #[error("score fixture has no entry for key {0}")]
    MissingFixture(String),
    #[error(transparent)]
    Fixture(#[from] JsonlError),
}

/// Text the verifier sees for one (claim, reasoning, verdict) triple.
pub fn frame(claim: &str, reasoning: &str, verdict: Verdict) -> String {
    format!("Claim: {claim}\nReasoning: {reasoning}\nVerdict: {verdict}")
}

/// One verifier training example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierExample {
    pub claim: String,
    pub reasoning: String,
    pub verdict: Verdict,
    pub label: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Vec<String>>,
    /// `frame(claim, reasoning, verdict)`, shared byte-for-byte with the trainer.
    pub text: String,
}

/// Builds one example per (claim, path) across `runs`, in run order then
/// path order. `evidence`, when given, attaches per-claim evidence texts.
pub fn build_training_data(
    runs: &[RunRecord],
    claims: &[ClaimRecord],
    evidence: Option<&HashMap<String, Vec<String>>>,
) -> Result<Vec<VerifierExample>, VerifierError> {
    let by_id: HashMap<&str, &ClaimRecord> = claims.iter().map(|c| (c.id.as_str(), c)).collect();
    let mut out = Vec::new();
    for run in runs {
        let claim = by_id
            .get(run.claim_id())
            .ok_or_else(|| VerifierError::MissingGold(run.claim_id().to_string()))?;
        let gold = claim
            .gold
            .ok_or_else(|| VerifierError::MissingGold(run.claim_id().to_string()))?;
        let ev = evidence.and_then(|m| m.get(run.claim_id())).cloned();
        for path in run.paths() {
            out.push(VerifierExample {
                claim: claim.claim.clone(),
                reasoning: path.justification.clone(),
                verdict: path.predicted,
                label: u8::from(path.predicted == gold),
                evidence: ev.clone(),
                text: frame(&claim.claim, &path.justification, path.predicted),
            });
        }
    }
    Ok(out)
}

/// Fraction of examples labelled 1; `None` for an empty set.
pub fn positive_rate(examples: &[VerifierExample]) -> Option<f64> {
    if examples.is_empty() {
        return None;
    }
    let pos = examples.iter().filter(|e| e.label == 1).count();
    Some(pos as f64 / examples.len() as f64)
}

/// One item of a scoring request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreItem {
    pub claim: String,
    pub reasoning: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Vec<String>>,
}

impl ScoreItem {
    /// Fixture lookup key: SHA-256 hex of the framed text.
    pub fn key(&self) -> String {
        hex::encode(Sha256::digest(frame(&self.claim, &self.reasoning, self.verdict).as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub items: Vec<ScoreItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub scores: Vec<f64>,
}

/// Scores reasoning paths; output order matches input order.
pub trait ScoringProvider: Send + Sync {
    fn score(&self, items: &[ScoreItem]) -> Result<Vec<f64>, ScoreError>;
}

/// Client for `POST {base}/v1/score`.
#[derive(Debug, Clone)]
pub struct HttpScorer {
    url: String,
    client: JsonClient,
}

impl HttpScorer {
    pub fn new(base: &str, client: JsonClient) -> Self {
        HttpScorer {
            url: join(base, "v1/score"),
            client,
        }
    }

    /// Bearer token from `VERIFIER_API_KEY`.
    pub fn from_env(base: &str, retry: RetryPolicy) -> Self {
        HttpScorer::new(base, JsonClient::from_env("VERIFIER_API_KEY", retry))
    }
}

impl ScoringProvider for HttpScorer {
    fn score(&self, items: &[ScoreItem]) -> Result<Vec<f64>, ScoreError> {
        let body = ScoreRequest {
            items: items.to_vec(),
        };
        let (resp, _): (ScoreResponse, _) = self.client.post(&self.url, &body)?;
        Ok(resp.scores)
    }
}

/// Fixture line: `{"key": <ScoreItem::key>, "score": f64}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureScore {
    pub key: String,
    pub score: f64,
}

/// Offline scorer backed by a key → score table.
#[derive(Debug, Clone, Default)]
pub struct FixtureScorer {
    scores: HashMap<String, f64>,
}

impl FixtureScorer {
    pub fn new(entries: impl IntoIterator<Item = (String, f64)>) -> Self {
        FixtureScorer {
            scores: entries.into_iter().collect(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScoreError> {
        let rows: Vec<FixtureScore> = jsonl::read(path)?;
        Ok(FixtureScorer::new(rows.into_iter().map(|r| (r.key, r.score))))
    }
}

impl ScoringProvider for FixtureScorer {
    fn score(&self, items: &[ScoreItem]) -> Result<Vec<f64>, ScoreError> {
        items
            .iter()
            .map(|it| {
                let key = it.key();
                self.scores
                    .get(&key)
                    .copied()
                    .ok_or(ScoreError::MissingFixture(key))
            })
            .collect()
    }
}

/// Scores every path of one claim, checking count and range of the reply.
pub fn score_paths(
    claim: &ClaimRecord,
    paths: &[ReasoningPath],
    evidence: Option<&[String]>,
    client: &dyn ScoringProvider,
) -> Result<Vec<f64>, ScoreError> {
    if paths.is_empty() {
        return Err(ScoreError::EmptyPaths);
    }
    let items: Vec<ScoreItem> = paths
        .iter()
        .map(|p| ScoreItem {
            claim: claim.claim.clone(),
            reasoning: p.justification.clone(),
            verdict: p.predicted,
            evidence: evidence.map(<[String]>::to_vec),
        })
        .collect();
    let scores = client.score(&items)?;
    if scores.len() != items.len() {
        return Err(ScoreError::CountMismatch {
            expected: items.len(),
            got: scores.len(),
        });
    }
    if let Some(&bad) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(ScoreError::ScoreOutOfRange(bad));
    }
    Ok(scores)
}
