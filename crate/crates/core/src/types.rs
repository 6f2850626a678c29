//! Domain types shared across the pipeline: the three-way verdict vocabulary,
//! claims, sampled reasoning paths and per-claim run traces.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::parse::{parse_verdict, ParseError};

/// Veracity label of a claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Verdict {
    True,
    False,
    Conflicting,
}

impl Verdict {
    pub const ALL: [Verdict; 3] = [Verdict::True, Verdict::False, Verdict::Conflicting];

    /// Canonical display form, `True` / `False` / `Conflicting`.
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::True => "True",
            Verdict::False => "False",
            Verdict::Conflicting => "Conflicting",
        }
    }

    /// Lowercase wire form used in every JSONL file.
    pub fn as_wire(self) -> &'static str {
        match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Conflicting => "conflicting",
        }
    }

    /// Row/column position in a confusion matrix.
    pub fn index(self) -> usize {
        match self {
            Verdict::True => 0,
            Verdict::False => 1,
            Verdict::Conflicting => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_verdict(s)
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_wire())
    }
}

impl<'de> Deserialize<'de> for Verdict {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        parse_verdict(&raw).map_err(serde::de::Error::custom)
    }
}

/// Claim complexity level used for adaptive routing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    /// Verifiable one-shot.
    Level0,
    /// Needs decomposition or remains hard; gets the full sampling budget.
    Level1,
}

impl Level {
    pub fn as_u8(self) -> u8 {
        match self {
            Level::Level0 => 0,
            Level::Level1 => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Level> {
        match v {
            0 => Some(Level::Level0),
            1 => Some(Level::Level1),
            _ => None,
        }
    }
}

impl Serialize for Level {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = u8::deserialize(deserializer)?;
        Level::from_u8(v)
            .ok_or_else(|| serde::de::Error::custom(format!("complexity level must be 0 or 1, got {v}")))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RecordError {
    #[error("claim id must be nonempty")]
    EmptyId,
    #[error("claim {0}: claim text is empty")]
    EmptyClaim(String),
    #[error("duplicate claim id {0}")]
    DuplicateId(String),
    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("run for {claim_id}: {reason}")]
    InconsistentRun { claim_id: String, reason: String },
}

/// A claim to verify, optionally carrying its gold verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawClaim")]
pub struct ClaimRecord {
    pub id: String,
    pub claim: String,
    #[serde(rename = "label", skip_serializing_if = "Option::is_none")]
    pub gold: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complexity: Option<Level>,
}

#[derive(Deserialize)]
struct RawClaim {
    id: String,
    claim: String,
    #[serde(default)]
    label: Option<Verdict>,
    #[serde(default)]
    category: Option<String>,
    #[serde(default)]
    complexity: Option<Level>,
}

impl TryFrom<RawClaim> for ClaimRecord {
    type Error = RecordError;

    fn try_from(raw: RawClaim) -> Result<Self, Self::Error> {
        let mut rec = ClaimRecord::new(raw.id, raw.claim, raw.label)?;
        rec.category = raw.category;
        rec.complexity = raw.complexity;
        Ok(rec)
    }
}

impl ClaimRecord {
    pub fn new(
        id: impl Into<String>,
        claim: impl Into<String>,
        gold: Option<Verdict>,
    ) -> Result<Self, RecordError> {
        let id = id.into();
        let claim = claim.into();
        if id.is_empty() {
            return Err(RecordError::EmptyId);
        }
        if claim.trim().is_empty() {
            return Err(RecordError::EmptyClaim(id));
        }
        Ok(ClaimRecord {
            id,
            claim,
            gold,
            category: None,
            complexity: None,
        })
    }
}

/// Checks id uniqueness across a dataset.
pub fn check_unique_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> Result<(), RecordError> {
    let mut seen = std::collections::HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(RecordError::DuplicateId(id.to_string()));
        }
    }
    Ok(())
}

/// One sampled justification plus verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPath")]
pub struct ReasoningPath {
    pub justification: String,
    pub predicted: Verdict,
    pub raw_response: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
}

#[derive(Deserialize)]
struct RawPath {
    justification: String,
    predicted: Verdict,
    raw_response: String,
    #[serde(default)]
    score: Option<f64>,
}

impl TryFrom<RawPath> for ReasoningPath {
    type Error = RecordError;

    fn try_from(raw: RawPath) -> Result<Self, Self::Error> {
        let path = ReasoningPath::new(raw.justification, raw.predicted, raw.raw_response);
        match raw.score {
            Some(s) => path.with_score(s),
            None => Ok(path),
        }
    }
}

impl ReasoningPath {
    pub fn new(
        justification: impl Into<String>,
        predicted: Verdict,
        raw_response: impl Into<String>,
    ) -> Self {
        ReasoningPath {
            justification: justification.into(),
            predicted,
            raw_response: raw_response.into(),
            score: None,
        }
    }

    pub fn with_score(mut self, score: f64) -> Result<Self, RecordError> {
        if !(0.0..=1.0).contains(&score) {
            return Err(RecordError::ScoreOutOfRange(score));
        }
        self.score = Some(score);
        Ok(self)
    }

    pub fn score(&self) -> Option<f64> {
        self.score
    }
}

/// Verdict-selection strategy. Serialized with the CLI names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "top1")]
    Top1,
    #[serde(rename = "sc")]
    SelfConsistency,
    #[serde(rename = "bon")]
    BoN,
    #[serde(rename = "adaptive")]
    AdaptiveBoN,
}

impl Strategy {
    pub fn cli_name(self) -> &'static str {
        match self {
            Strategy::Top1 => "top1",
            Strategy::SelfConsistency => "sc",
            Strategy::BoN => "bon",
            Strategy::AdaptiveBoN => "adaptive",
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "top1" => Ok(Strategy::Top1),
            "sc" => Ok(Strategy::SelfConsistency),
            "bon" => Ok(Strategy::BoN),
            "adaptive" => Ok(Strategy::AdaptiveBoN),
            other => Err(format!("unknown strategy {other:?} (expected top1|sc|bon|adaptive)")),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

/// Per-claim trace of one strategy run.
///
/// The chosen-index/final-verdict relation is checked on construction and on
/// deserialization, so a `RunRecord` value is always internally consistent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRun")]
pub struct RunRecord {
    claim_id: String,
    strategy: Strategy,
    evidence_ids: Vec<String>,
    paths: Vec<ReasoningPath>,
    chosen_index: usize,
    final_verdict: Verdict,
    llm_calls: u64,
    wall_ms: u64,
}

#[derive(Deserialize)]
struct RawRun {
    claim_id: String,
    strategy: Strategy,
    evidence_ids: Vec<String>,
    paths: Vec<ReasoningPath>,
    chosen_index: usize,
    final_verdict: Verdict,
    llm_calls: u64,
    wall_ms: u64,
}

impl TryFrom<RawRun> for RunRecord {
    type Error = RecordError;

    fn try_from(r: RawRun) -> Result<Self, Self::Error> {
        RunRecord::new(
            r.claim_id,
            r.strategy,
            r.evidence_ids,
            r.paths,
            r.chosen_index,
            r.final_verdict,
            r.llm_calls,
            r.wall_ms,
        )
    }
}

impl RunRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        claim_id: impl Into<String>,
        strategy: Strategy,
        evidence_ids: Vec<String>,
        paths: Vec<ReasoningPath>,
        chosen_index: usize,
        final_verdict: Verdict,
        llm_calls: u64,
        wall_ms: u64,
    ) -> Result<Self, RecordError> {
        let claim_id = claim_id.into();
        let bad = |reason: String| RecordError::InconsistentRun {
            claim_id: claim_id.clone(),
            reason,
        };
        if chosen_index >= paths.len() {
            return Err(bad(format!(
                "chosen_index {chosen_index} out of range for {} paths",
                paths.len()
            )));
        }
        if (llm_calls as usize) < paths.len() {
            return Err(bad(format!(
                "llm_calls {llm_calls} below path count {}",
                paths.len()
            )));
        }
        match strategy {
            Strategy::SelfConsistency => {
                let (idx, winner) = crate::strategies::select_majority(&paths)
                    .map_err(|e| bad(e.to_string()))?;
                if winner != final_verdict || idx != chosen_index {
                    return Err(bad(format!(
                        "majority is {winner} at index {idx}, record says {final_verdict} at {chosen_index}"
                    )));
                }
            }
            _ => {
                if paths[chosen_index].predicted != final_verdict {
                    return Err(bad(format!(
                        "final_verdict {final_verdict} differs from chosen path verdict {}",
                        paths[chosen_index].predicted
                    )));
                }
            }
        }
        Ok(RunRecord {
            claim_id,
            strategy,
            evidence_ids,
            paths,
            chosen_index,
            final_verdict,
            llm_calls,
            wall_ms,
        })
    }

    pub fn claim_id(&self) -> &str {
        &self.claim_id
    }
    pub fn strategy(&self) -> Strategy {
        self.strategy
    }
    pub fn evidence_ids(&self) -> &[String] {
        &self.evidence_ids
    }
    pub fn paths(&self) -> &[ReasoningPath] {
        &self.paths
    }
    pub fn chosen_index(&self) -> usize {
        self.chosen_index
    }
    pub fn final_verdict(&self) -> Verdict {
        self.final_verdict
    }
    pub fn llm_calls(&self) -> u64 {
        self.llm_calls
    }
    pub fn wall_ms(&self) -> u64 {
        self.wall_ms
    }

    /// Copy with the wall-clock field zeroed, for reproducible output files.
    pub fn without_timing(mut self) -> Self {
        self.wall_ms = 0;
        self
    }
}
