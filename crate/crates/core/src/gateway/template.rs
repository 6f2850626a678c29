//! Plain-text prompt templates.
//!
//! A template file is split into sections by `### <name>` header lines:
//! `### system`, zero or more `### example`, and `### input`. Example
//! sections hold `[Claim]:`, `[Evidence]:`, `[Verdict]:` and
//! `[Justification]:` fields, each running until the next field marker.
//! The input frame uses `{name}` placeholders.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parse::parse_verdict;
use crate::retrieval::EvidenceDoc;
use crate::types::{ClaimRecord, Verdict};

pub const FACT_CHECK_TEMPLATE: &str = include_str!("../../templates/fact_check.txt");
pub const DECOMPOSE_TEMPLATE: &str = include_str!("../../templates/decompose.txt");
pub const JUDGE_TEMPLATE: &str = include_str!("../../templates/judge_drift.txt");

/// Placeholders the judge frame must contain exactly once.
pub const JUDGE_PLACEHOLDERS: &[&str] = &[
    "claim",
    "evidence",
    "gold",
    "reasoning_without",
    "prediction_without",
    "reasoning_with",
    "prediction_with",
];

#[derive(Debug, Error, PartialEq)]
pub enum TemplateError {
    #[error("input frame must contain {{{0}}} exactly once (found {1})")]
    Placeholder(&'static str, usize),
    #[error("template has no `### {0}` section")]
    MissingSection(&'static str),
    #[error("unknown template section `### {0}`")]
    UnknownSection(String),
    #[error("example {index}: {reason}")]
    BadExample { index: usize, reason: String },
    #[error("at least one evidence document is required")]
    NoEvidence,
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }
}

/// A worked demonstration shown before the input claim.
#[derive(Debug, Clone, PartialEq)]
pub struct Exemplar {
    pub claim: String,
    pub evidence: String,
    pub verdict: Verdict,
    pub justification: String,
}

/// Replaces `{name}` occurrences in a single left-to-right pass, so values
/// that themselves contain braces are never re-expanded. Unknown
/// placeholders are left as written.
pub fn substitute(frame: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(frame.len());
    let mut rest = frame;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let name = &after[..close];
            values
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| (*v, close))
        });
        match hit {
            Some((value, close)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn count_placeholder(frame: &str, name: &str) -> usize {
    frame.matches(&format!("{{{name}}}")).count()
}

struct Sections {
    system: Option<String>,
    examples: Vec<String>,
    input: Option<String>,
}

fn split_sections(text: &str) -> Result<Sections, TemplateError> {
    let mut sections = Sections {
        system: None,
        examples: Vec::new(),
        input: None,
    };
    let mut current: Option<(String, Vec<&str>)> = None;
    let flush = |cur: Option<(String, Vec<&str>)>, s: &mut Sections| -> Result<(), TemplateError> {
        if let Some((name, lines)) = cur {
            let body = lines.join("\n").trim().to_string();
            match name.as_str() {
                "system" => s.system = Some(body),
                "example" => s.examples.push(body),
                "input" => s.input = Some(body),
                other => return Err(TemplateError::UnknownSection(other.to_string())),
            }
        }
        Ok(())
    };
    for line in text.lines() {
        if let Some(name) = line.strip_prefix("### ") {
            flush(current.take(), &mut sections)?;
            current = Some((name.trim().to_lowercase(), Vec::new()));
        } else if let Some((_, lines)) = current.as_mut() {
            lines.push(line);
        }
    }
    flush(current, &mut sections)?;
    Ok(sections)
}

fn parse_exemplar(index: usize, body: &str) -> Result<Exemplar, TemplateError> {
    const FIELDS: [&str; 4] = ["[Claim]:", "[Evidence]:", "[Verdict]:", "[Justification]:"];
    let mut values: [Option<String>; 4] = Default::default();
    let mut current: Option<usize> = None;
    for line in body.lines() {
        let trimmed = line.trim_start();
        if let Some(i) = FIELDS.iter().position(|f| trimmed.starts_with(f)) {
            current = Some(i);
            values[i] = Some(trimmed[FIELDS[i].len()..].trim().to_string());
        } else if let Some(i) = current {
            let v = values[i].get_or_insert_with(String::new);
            v.push('\n');
            v.push_str(line);
        }
    }
    let take = |i: usize| {
        values[i]
            .clone()
            .map(|s| s.trim().to_string())
            .ok_or_else(|| TemplateError::BadExample {
                index,
                reason: format!("missing {}", FIELDS[i]),
            })
    };
    let verdict_token = take(2)?;
    Ok(Exemplar {
        claim: take(0)?,
        evidence: take(1)?,
        verdict: parse_verdict(&verdict_token).map_err(|e| TemplateError::BadExample {
            index,
            reason: e.to_string(),
        })?,
        justification: take(3)?,
    })
}

fn read_file(path: &Path) -> Result<String, TemplateError> {
    std::fs::read_to_string(path).map_err(|e| TemplateError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Few-shot verification prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    system: String,
    exemplars: Vec<Exemplar>,
    input_frame: String,
}

impl PromptTemplate {
    pub fn new(
        system: impl Into<String>,
        exemplars: Vec<Exemplar>,
        input_frame: impl Into<String>,
    ) -> Result<Self, TemplateError> {
        let input_frame = input_frame.into();
        for name in ["claim", "evidence"] {
            let n = count_placeholder(&input_frame, name);
            if n != 1 {
                return Err(TemplateError::Placeholder(name, n));
            }
        }
        Ok(PromptTemplate {
            system: system.into(),
            exemplars,
            input_frame,
        })
    }

    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        let s = split_sections(text)?;
        let exemplars = s
            .examples
            .iter()
            .enumerate()
            .map(|(i, body)| parse_exemplar(i + 1, body))
            .collect::<Result<Vec<_>, _>>()?;
        PromptTemplate::new(
            s.system.ok_or(TemplateError::MissingSection("system"))?,
            exemplars,
            s.input.ok_or(TemplateError::MissingSection("input"))?,
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TemplateError> {
        PromptTemplate::parse(&read_file(path.as_ref())?)
    }

    /// The shipped few-shot fact-checking prompt.
    pub fn fact_checking() -> Self {
        PromptTemplate::parse(FACT_CHECK_TEMPLATE).expect("bundled template is valid")
    }

    pub fn system(&self) -> &str {
        &self.system
    }

    pub fn exemplars(&self) -> &[Exemplar] {
        &self.exemplars
    }

    pub fn input_frame(&self) -> &str {
        &self.input_frame
    }
}

fn evidence_block(evidence: &[EvidenceDoc]) -> String {
    evidence
        .iter()
        .enumerate()
        .map(|(i, d)| format!("[Evidence {}]: {}", i + 1, d.text.trim()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn subquestion_block(questions: &[String]) -> String {
    let mut out = String::from("Sub-questions:\n");
    for (i, q) in questions.iter().enumerate() {
        out.push_str(&format!("{}. {}\n", i + 1, q));
    }
    out
}

/// Builds the system + user messages for verifying one claim.
///
/// Evidence is rendered as numbered `[Evidence i]:` blocks in the given
/// order. When sub-questions are supplied they fill `{subquestions}`, or are
/// appended to the user message if the frame has no such placeholder.
pub fn render_prompt(
    template: &PromptTemplate,
    claim: &ClaimRecord,
    evidence: &[EvidenceDoc],
    subquestions: Option<&[String]>,
) -> Result<Vec<ChatMessage>, TemplateError> {
    if evidence.is_empty() {
        return Err(TemplateError::NoEvidence);
    }
    let mut user = String::new();
    for (i, ex) in template.exemplars.iter().enumerate() {
        user.push_str(&format!(
            "Example {}\n[Claim]: {}\n[Evidence]: {}\n[Verdict]: {}\n[Justification]: {}\n\n",
            i + 1,
            ex.claim,
            ex.evidence,
            ex.verdict,
            ex.justification
        ));
    }
    let evidence_text = evidence_block(evidence);
    let sub_text = subquestions
        .filter(|q| !q.is_empty())
        .map(subquestion_block)
        .unwrap_or_default();
    let has_sub_slot = count_placeholder(&template.input_frame, "subquestions") > 0;
    user.push_str(&substitute(
        &template.input_frame,
        &[
            ("claim", claim.claim.trim()),
            ("evidence", &evidence_text),
            ("subquestions", &sub_text),
        ],
    ));
    if !has_sub_slot && !sub_text.is_empty() {
        user.push_str("\n\n");
        user.push_str(sub_text.trim_end());
    }
    Ok(vec![ChatMessage::system(template.system.clone()), ChatMessage::user(user)])
}

/// A system prompt plus a single input frame with named placeholders; used
/// for decomposition and judge prompts.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTemplate {
    system: String,
    input_frame: String,
    required: Vec<&'static str>,
}

impl FrameTemplate {
    pub fn parse(text: &str, required: &[&'static str]) -> Result<Self, TemplateError> {
        let s = split_sections(text)?;
        let input_frame = s.input.ok_or(TemplateError::MissingSection("input"))?;
        for &name in required {
            let n = count_placeholder(&input_frame, name);
            if n != 1 {
                return Err(TemplateError::Placeholder(name, n));
            }
        }
        Ok(FrameTemplate {
            system: s.system.ok_or(TemplateError::MissingSection("system"))?,
            input_frame,
            required: required.to_vec(),
        })
    }

    pub fn load(path: impl AsRef<Path>, required: &[&'static str]) -> Result<Self, TemplateError> {
        FrameTemplate::parse(&read_file(path.as_ref())?, required)
    }

    pub fn decomposition() -> Self {
        FrameTemplate::parse(DECOMPOSE_TEMPLATE, &["claim"]).expect("bundled template is valid")
    }

    pub fn judge() -> Self {
        FrameTemplate::parse(JUDGE_TEMPLATE, JUDGE_PLACEHOLDERS).expect("bundled template is valid")
    }

    pub fn render(&self, values: &[(&str, &str)]) -> Vec<ChatMessage> {
        vec![
            ChatMessage::system(self.system.clone()),
            ChatMessage::user(substitute(&self.input_frame, values)),
        ]
    }

    pub fn required(&self) -> &[&'static str] {
        &self.required
    }
}
