//! Verdict selection over sampled reasoning paths, and the per-claim runner
//! that ties sampling, scoring and selection together.
//!
//! Tie rules: majority voting prefers the tied verdict that appears first in
//! the path list; best-of-N prefers the lowest index among equal scores.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::gateway::{
    render_prompt, sample_paths, ChatProvider, ChatRequest, FrameTemplate, PromptTemplate,
    SampleError, SamplingConfig, TemplateError,
};
use crate::http::TransportError;
use crate::retrieval::EvidenceDoc;
use crate::types::{ClaimRecord, Level, ReasoningPath, RecordError, RunRecord, Strategy, Verdict};
use crate::verifier::{score_paths, ScoreError, ScoringProvider};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("no reasoning paths to select from")]
    EmptyPaths,
    #[error("{paths} paths but {scores} scores")]
    LengthMismatch { paths: usize, scores: usize },
    #[error("score {0} is not finite")]
    NonFiniteScore(f64),
    #[error("decomposition produced no sub-questions")]
    EmptyDecomposition,
    #[error("claim {0} has no complexity level")]
    MissingLevel(String),
    #[error("claim {0} has no evidence")]
    MissingEvidence(String),
    #[error("strategy {0} needs a scoring provider")]
    MissingScorer(Strategy),
    #[error("invalid strategy config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Scoring(#[from] ScoreError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Record(#[from] RecordError),
}

pub fn select_top1(paths: &[ReasoningPath]) -> Result<(usize, Verdict), StrategyError> {
    let first = paths.first().ok_or(StrategyError::EmptyPaths)?;
    Ok((0, first.predicted))
}

/// Most frequent verdict and the index of the first path carrying it.
pub fn select_majority(paths: &[ReasoningPath]) -> Result<(usize, Verdict), StrategyError> {
    if paths.is_empty() {
        return Err(StrategyError::EmptyPaths);
    }
    // (count, first index) per verdict
    let mut tally: Vec<(Verdict, usize, usize)> = Vec::with_capacity(3);
    for (i, p) in paths.iter().enumerate() {
        match tally.iter_mut().find(|(v, _, _)| *v == p.predicted) {
            Some(entry) => entry.1 += 1,
            None => tally.push((p.predicted, 1, i)),
        }
    }
    // tally is ordered by first occurrence, so max_by keeps the earliest on ties
    let (verdict, _, first) = tally
        .into_iter()
        .reduce(|best, cur| if cur.1 > best.1 { cur } else { best })
        .expect("nonempty");
    Ok((first, verdict))
}

/// Highest-scoring path; lowest index wins ties.
pub fn select_bon(paths: &[ReasoningPath], scores: &[f64]) -> Result<(usize, Verdict), StrategyError> {
    if paths.len() != scores.len() {
        return Err(StrategyError::LengthMismatch {
            paths: paths.len(),
            scores: scores.len(),
        });
    }
    if paths.is_empty() {
        return Err(StrategyError::EmptyPaths);
    }
    if let Some(&bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(StrategyError::NonFiniteScore(bad));
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    Ok((best, paths[best].predicted))
}

/// Extracts yes/no sub-questions from a decomposition completion.
///
/// Accepts numbered (`1.`, `2)`, `Q3:`) or bulleted lines; only lines ending
/// in `?` are kept.
pub fn parse_subquestions(text: &str) -> Vec<String> {
    text.lines()
        .filter_map(|line| {
            let mut s = line.trim().trim_start_matches(['-', '*', '•']).trim_start();
            let lower = s.to_ascii_lowercase();
            for prefix in ["question", "q"] {
                if lower.starts_with(prefix)
                    && s[prefix.len()..].trim_start().starts_with(|c: char| c.is_ascii_digit())
                {
                    s = s[prefix.len()..].trim_start();
                    break;
                }
            }
            let digits = s.chars().take_while(char::is_ascii_digit).count();
            if digits > 0 {
                let rest = &s[digits..];
                if let Some(r) = rest.strip_prefix(['.', ')', ':']) {
                    s = r;
                }
            }
            let q = s.trim();
            (q.len() > 1 && q.ends_with('?')).then(|| q.to_string())
        })
        .collect()
}

/// Asks the model to split a claim into yes/no sub-questions.
pub fn decompose(
    claim: &ClaimRecord,
    template: &FrameTemplate,
    sampling: &SamplingConfig,
    transport: &dyn ChatProvider,
) -> Result<Vec<String>, StrategyError> {
    let req = ChatRequest {
        model: sampling.model.clone(),
        messages: template.render(&[("claim", claim.claim.trim())]),
        temperature: sampling.temperature,
        n: 1,
        max_tokens: sampling.max_tokens,
        seed: sampling.seed,
    };
    let resp = transport.complete(&req)?;
    let text = resp.contents.first().map(String::as_str).unwrap_or("");
    let qs = parse_subquestions(text);
    if qs.is_empty() {
        return Err(StrategyError::EmptyDecomposition);
    }
    Ok(qs)
}

/// Strategy settings for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub kind: Strategy,
    pub m: u32,
    pub with_decomposition: bool,
    /// Paths sampled for level-0 claims under the adaptive strategy.
    pub level0_m: u32,
}

impl StrategyConfig {
    pub fn new(kind: Strategy, m: u32) -> Self {
        StrategyConfig {
            kind,
            m,
            with_decomposition: false,
            level0_m: 1,
        }
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        if self.m == 0 {
            return Err(StrategyError::InvalidConfig("m must be at least 1".into()));
        }
        if self.level0_m == 0 || self.level0_m > self.m {
            return Err(StrategyError::InvalidConfig(format!(
                "level0_m must be in 1..={}, got {}",
                self.m, self.level0_m
            )));
        }
        Ok(())
    }
}

/// Everything a claim run needs besides the claim and its evidence.
pub struct Pipeline<'a> {
    pub template: &'a PromptTemplate,
    pub decomposition: &'a FrameTemplate,
    pub chat: &'a dyn ChatProvider,
    pub scorer: Option<&'a dyn ScoringProvider>,
    pub sampling: SamplingConfig,
    /// Send retrieved evidence texts to the scorer.
    pub score_with_evidence: bool,
    /// Zero `wall_ms` in emitted records.
    pub deterministic: bool,
}

enum Selection {
    Top1,
    Majority,
    BestOfN,
}

impl Pipeline<'_> {
    /// Runs one claim under `cfg`. `level` is required for the adaptive
    /// strategy and falls back to the claim's own complexity tag.
    pub fn run_claim(
        &self,
        claim: &ClaimRecord,
        evidence: &[EvidenceDoc],
        cfg: &StrategyConfig,
        level: Option<Level>,
    ) -> Result<RunRecord, StrategyError> {
        cfg.validate()?;
        if evidence.is_empty() {
            return Err(StrategyError::MissingEvidence(claim.id.clone()));
        }
        let started = Instant::now();
        let (m, selection) = match cfg.kind {
            Strategy::Top1 => (1, Selection::Top1),
            Strategy::SelfConsistency => (cfg.m, Selection::Majority),
            Strategy::BoN => (cfg.m, Selection::BestOfN),
            Strategy::AdaptiveBoN => match level.or(claim.complexity) {
                Some(Level::Level0) => (cfg.level0_m, Selection::Top1),
                Some(Level::Level1) => (cfg.m, Selection::BestOfN),
                None => return Err(StrategyError::MissingLevel(claim.id.clone())),
            },
        };
        if matches!(selection, Selection::BestOfN) && self.scorer.is_none() {
            return Err(StrategyError::MissingScorer(cfg.kind));
        }

        let mut llm_calls = 0u64;
        let subquestions = if cfg.with_decomposition {
            llm_calls += 1;
            Some(decompose(claim, self.decomposition, &self.sampling, self.chat)?)
        } else {
            None
        };
        let messages = render_prompt(self.template, claim, evidence, subquestions.as_deref())?;
        let sampling = SamplingConfig {
            m,
            ..self.sampling.clone()
        };
        let outcome = sample_paths(&messages, &sampling, self.chat)?;
        llm_calls += u64::from(outcome.completions);
        let mut paths = outcome.paths;

        let (chosen, verdict) = match selection {
            Selection::Top1 => select_top1(&paths)?,
            Selection::Majority => select_majority(&paths)?,
            Selection::BestOfN => {
                let texts: Vec<String> = evidence.iter().map(|d| d.text.clone()).collect();
                let ev = self.score_with_evidence.then_some(texts.as_slice());
                let scorer = self.scorer.expect("checked above");
                let scores = score_paths(claim, &paths, ev, scorer)?;
                paths = paths
                    .into_iter()
                    .zip(&scores)
                    .map(|(p, &s)| p.with_score(s))
                    .collect::<Result<_, _>>()?;
                select_bon(&paths, &scores)?
            }
        };
        let wall_ms = if self.deterministic {
            0
        } else {
            started.elapsed().as_millis() as u64
        };
        Ok(RunRecord::new(
            claim.id.clone(),
            cfg.kind,
            evidence.iter().map(|d| d.doc_id.clone()).collect(),
            paths,
            chosen,
            verdict,
            llm_calls,
            wall_ms,
        )?)
    }

    /// Runs every claim, in parallel over `jobs` threads. Results keep input
    /// order.
    pub fn run_batch(
        &self,
        claims: &[ClaimRecord],
        evidence: &HashMap<String, Vec<EvidenceDoc>>,
        cfg: &StrategyConfig,
        levels: Option<&HashMap<String, Level>>,
        jobs: usize,
    ) -> Vec<Result<RunRecord, StrategyError>> {
        let work = || {
            claims
                .par_iter()
                .map(|c| {
                    let ev = evidence.get(&c.id).map(Vec::as_slice).unwrap_or(&[]);
                    let level = levels.and_then(|l| l.get(&c.id).copied());
                    self.run_claim(c, ev, cfg, level)
                })
                .collect()
        };
        match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
            Ok(pool) => pool.install(work),
            Err(_) => work(),
        }
    }
}

/// Generation calls an adaptive run will make: `level0_m` per level-0 claim
/// plus `m` per level-1 claim.
pub fn adaptive_generation_calls(levels: impl IntoIterator<Item = Level>, cfg: &StrategyConfig) -> u64 {
    levels
        .into_iter()
        .map(|l| match l {
            Level::Level0 => u64::from(cfg.level0_m),
            Level::Level1 => u64::from(cfg.m),
        })
        .sum()
}
