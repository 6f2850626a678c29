//! Parsing of model completions into verdicts and reasoning paths.

use thiserror::Error;

use crate::types::{ReasoningPath, Verdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown verdict token {0:?}")]
    UnknownVerdict(String),
    #[error("completion has no [Label]: line")]
    MissingLabel,
}

const LABEL_MARKERS: [&str; 3] = ["[label]:", "[prediction]:", "[final verdict]:"];
const JUSTIFICATION_MARKER: &str = "[justification]:";

fn lookup(word: &str) -> Option<Verdict> {
    match word {
        "true" | "supports" | "supported" => Some(Verdict::True),
        "false" | "refutes" | "refuted" => Some(Verdict::False),
        "conflicting" | "conflict" | "mixture" => Some(Verdict::Conflicting),
        _ => None,
    }
}

/// Maps a verdict token onto the three-way vocabulary.
///
/// Matching is case-insensitive and ignores punctuation, so `"(SUPPORTS,"`
/// and `"True."` both parse. A token whose first word is a verdict
/// (`"False - the figure is wrong"`) also parses.
pub fn parse_verdict(token: &str) -> Result<Verdict, ParseError> {
    let cleaned: String = token
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    let cleaned = cleaned.trim();
    if let Some(v) = lookup(cleaned) {
        return Ok(v);
    }
    cleaned
        .split_whitespace()
        .next()
        .and_then(lookup)
        .ok_or_else(|| ParseError::UnknownVerdict(token.to_string()))
}

/// Finds the first label line and returns the text after its marker.
fn label_token(raw: &str) -> Option<&str> {
    for line in raw.lines() {
        let body = line.trim_start_matches(|c: char| c.is_whitespace() || matches!(c, '-' | '*' | '•'));
        // ASCII lowering keeps byte offsets aligned with `body`
        let lowered = body.to_ascii_lowercase();
        for marker in LABEL_MARKERS {
            if lowered.starts_with(marker) {
                return Some(&body[marker.len()..]);
            }
        }
    }
    None
}

/// Parses a full completion into a [`ReasoningPath`].
///
/// The verdict comes from the first `[Label]:` line (`[Prediction]:` and
/// `[Final Verdict]:` are accepted too). The justification is whatever follows
/// the first `[Justification]:` marker, or empty when there is none.
pub fn parse_response(raw: &str) -> Result<ReasoningPath, ParseError> {
    let token = label_token(raw).ok_or(ParseError::MissingLabel)?;
    let predicted = parse_verdict(token)?;
    let justification = raw
        .to_ascii_lowercase()
        .find(JUSTIFICATION_MARKER)
        .map(|pos| raw[pos + JUSTIFICATION_MARKER.len()..].trim().to_string())
        .unwrap_or_default();
    Ok(ReasoningPath::new(justification, predicted, raw))
}
