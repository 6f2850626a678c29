use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::gateway::{ChatProvider, ChatRequest, FrameTemplate, SamplingConfig};

/// One before/after pair to audit for reasoning drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeCase {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub claim: String,
    pub evidence: String,
    pub gold: String,
    pub reasoning_without: String,
    pub reasoning_with: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction_without: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prediction_with: Option<String>,
}

impl JudgeCase {
    fn check(&self) -> Result<(), EvalError> {
        for (name, v) in [
            ("claim", &self.claim),
            ("evidence", &self.evidence),
            ("gold", &self.gold),
            ("reasoning_without", &self.reasoning_without),
            ("reasoning_with", &self.reasoning_with),
        ] {
            if v.trim().is_empty() {
                return Err(EvalError::EmptyField(name));
            }
        }
        Ok(())
    }
}

/// 1 when the verifier-guided reasoning mitigates drift, else 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub label: u8,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSummary {
    pub cases: u64,
    pub label_one: u64,
    /// Fraction of cases judged 1.
    pub drift_rate: f64,
}

/// Strips list numbering, bullets and brackets, then matches `name:`
/// case-insensitively; returns the text after the colon.
fn field<'a>(line: &'a str, name: &str) -> Option<&'a str> {
    let s = line.trim_start();
    let s = s.trim_start_matches(|c: char| c.is_ascii_digit());
    let s = s.trim_start_matches(['.', ')', '-', '*', '#']).trim_start();
    let s = s.strip_prefix('[').unwrap_or(s);
    let head = s.get(..name.len())?;
    if !head.eq_ignore_ascii_case(name) {
        return None;
    }
    let s = s[name.len()..].trim_start();
    let s = s.strip_prefix(']').unwrap_or(s).trim_start();
    s.strip_prefix(':')
}

/// Reads the label from the first `Label:` line (bracketed or numbered) and
/// the explanation from the text following `Explanation:`.
pub fn parse_judgment(text: &str) -> Result<Judgment, EvalError> {
    let mut label = None;
    let mut explanation: Option<Vec<&str>> = None;
    for line in text.lines() {
        if let Some(lines) = explanation.as_mut() {
            lines.push(line);
        } else if let Some(v) = field(line, "explanation") {
            explanation = Some(vec![v]);
        } else if label.is_none() {
            if let Some(v) = field(line, "label") {
                label = match v.trim_start().chars().next() {
                    Some('0') => Some(0),
                    Some('1') => Some(1),
                    _ => return Err(EvalError::UnparseableJudgment(format!("label value `{}`", v.trim()))),
                };
            }
        }
    }
    let label = label.ok_or_else(|| EvalError::UnparseableJudgment("no label line".into()))?;
    Ok(Judgment {
        id: None,
        label,
        explanation: explanation.map(|l| l.join("\n").trim().to_string()).unwrap_or_default(),
    })
}

/// Asks the judge model about one case.
pub fn judge_drift(
    case: &JudgeCase,
    template: &FrameTemplate,
    sampling: &SamplingConfig,
    chat: &dyn ChatProvider,
) -> Result<Judgment, EvalError> {
    case.check()?;
    let messages = template.render(&[
        ("claim", case.claim.trim()),
        ("evidence", case.evidence.trim()),
        ("gold", case.gold.trim()),
        ("reasoning_without", case.reasoning_without.trim()),
        ("prediction_without", case.prediction_without.as_deref().unwrap_or("").trim()),
        ("reasoning_with", case.reasoning_with.trim()),
        ("prediction_with", case.prediction_with.as_deref().unwrap_or("").trim()),
    ]);
    let req = ChatRequest {
        model: sampling.model.clone(),
        messages,
        temperature: sampling.temperature,
        n: 1,
        max_tokens: sampling.max_tokens,
        seed: sampling.seed,
    };
    let resp = chat.complete(&req)?;
    let text = resp
        .contents
        .first()
        .ok_or_else(|| EvalError::UnparseableJudgment("empty response".into()))?;
    let mut j = parse_judgment(text)?;
    j.id = case.id.clone();
    Ok(j)
}

/// Judges every case in parallel, keeping input order.
pub fn judge_batch(
    cases: &[JudgeCase],
    template: &FrameTemplate,
    sampling: &SamplingConfig,
    chat: &dyn ChatProvider,
) -> Result<Vec<Judgment>, EvalError> {
    cases
        .par_iter()
        .map(|c| judge_drift(c, template, sampling, chat))
        .collect()
}

pub fn drift_summary(judgments: &[Judgment]) -> Result<DriftSummary, EvalError> {
    if judgments.is_empty() {
        return Err(EvalError::EmptyEvaluation);
    }
    let cases = judgments.len() as u64;
    let label_one = judgments.iter().filter(|j| j.label == 1).count() as u64;
    Ok(DriftSummary {
        cases,
        label_one,
        drift_rate: label_one as f64 / cases as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{ReplayEntry, ReplayTransport, WILDCARD_KEY};

    fn case(i: usize) -> JudgeCase {
        JudgeCase {
            id: Some(format!("j{i}")),
            claim: format!("claim {i}"),
            evidence: "some evidence".into(),
            gold: "True".into(),
            reasoning_without: "drifting".into(),
            reasoning_with: "focused".into(),
            prediction_without: Some("Conflicting".into()),
            prediction_with: Some("True".into()),
        }
    }

    #[test]
    fn parses_both_output_shapes() {
        let j = parse_judgment("1. Label: 1\n2. Explanation: stays on topic\nand concise").unwrap();
        assert_eq!(j.label, 1);
        assert_eq!(j.explanation, "stays on topic\nand concise");
        let j = parse_judgment("[Label]: 1\n\n[Explanation]: The reward model-based reasoning").unwrap();
        assert_eq!((j.label, j.explanation.as_str()), (1, "The reward model-based reasoning"));
        assert_eq!(parse_judgment("[label]: 0").unwrap().label, 0);
        assert!(parse_judgment("Label: maybe").is_err());
        assert!(parse_judgment("no verdict here").is_err());
    }

    #[test]
    fn renders_template_verbatim_and_replays() {
        let template = FrameTemplate::judge();
        let c = case(0);
        let rendered = template.render(&[("claim", "X")]);
        assert!(rendered[0].content.starts_with("Instruction: You are a fact-checking expert"));
        assert!(rendered[1].content.contains("[Label]: 1"));
        let chat = ReplayTransport::new([ReplayEntry {
            key_hash: WILDCARD_KEY.into(),
            seq: 0,
            content: "1. Label: 1\n2. Explanation: better".into(),
        }]);
        let j = judge_drift(&c, &template, &SamplingConfig::default(), &chat).unwrap();
        assert_eq!((j.id.as_deref(), j.label), (Some("j0"), 1));
        let mut empty = c.clone();
        empty.reasoning_with = " ".into();
        assert!(matches!(
            judge_drift(&empty, &template, &SamplingConfig::default(), &chat),
            Err(EvalError::EmptyField("reasoning_with"))
        ));
    }

    #[test]
    fn batch_drift_rate() {
        let template = FrameTemplate::judge();
        let cfg = SamplingConfig::default();
        let cases: Vec<JudgeCase> = (0..100).map(case).collect();
        let entries = cases.iter().enumerate().map(|(i, c)| {
            let messages = template.render(&[
                ("claim", c.claim.as_str()),
                ("evidence", "some evidence"),
                ("gold", "True"),
                ("reasoning_without", "drifting"),
                ("prediction_without", "Conflicting"),
                ("reasoning_with", "focused"),
                ("prediction_with", "True"),
            ]);
            ReplayEntry {
                key_hash: ReplayTransport::key_for(&messages),
                seq: 0,
                content: format!("[Label]: {}\n[Explanation]: case {i}", u8::from(i < 34)),
            }
        });
        let chat = ReplayTransport::new(entries);
        let judgments = judge_batch(&cases, &template, &cfg, &chat).unwrap();
        assert_eq!(judgments[0].explanation, "case 0");
        let s = drift_summary(&judgments).unwrap();
        assert_eq!((s.cases, s.label_one, s.drift_rate), (100, 34, 0.34));
    }
}
