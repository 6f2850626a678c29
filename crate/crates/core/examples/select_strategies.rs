// The four selection rules on one claim: nine paths say Conflicting, one
// says True, and the verifier likes the True path best. Majority vote
// follows the crowd; best-of-N follows the verifier.
//
//     cargo run --example select_strategies

use std::error::Error;

use ttsfc::gateway::{FrameTemplate, PromptTemplate, ReplayEntry, ReplayTransport, SamplingConfig, WILDCARD_KEY};
use ttsfc::retrieval::EvidenceDoc;
use ttsfc::strategies::{Pipeline, StrategyConfig};
use ttsfc::verifier::{ScoreError, ScoreItem, ScoringProvider};
use ttsfc::{ClaimRecord, Level, Strategy, Verdict};

/// Stand-in verifier: confident in True paths, lukewarm about the rest.
struct Prefers(Verdict);

impl ScoringProvider for Prefers {
    fn score(&self, items: &[ScoreItem]) -> Result<Vec<f64>, ScoreError> {
        Ok(items.iter().map(|it| if it.verdict == self.0 { 0.92 } else { 0.31 }).collect())
    }
}

fn replay() -> ReplayTransport {
    ReplayTransport::new((0..10).map(|seq| ReplayEntry {
        key_hash: WILDCARD_KEY.into(),
        seq,
        content: if seq == 7 {
            "[Label]: True\n[Justification]: The cited report confirms the figure.".into()
        } else {
            format!("[Label]: Conflicting\n[Justification]: Sources disagree ({seq}).")
        },
    }))
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let claim = ClaimRecord::new("c1", "Imports tripled after the trade deal.", Some(Verdict::True))?;
    let evidence = [EvidenceDoc::new("d1", "Imports rose from $2bn to $6bn in the three years after the deal.")];
    let (template, decomposition) = (PromptTemplate::fact_checking(), FrameTemplate::decomposition());
    let scorer = Prefers(Verdict::True);

    for (kind, level) in [
        (Strategy::Top1, None),
        (Strategy::SelfConsistency, None),
        (Strategy::BoN, None),
        (Strategy::AdaptiveBoN, Some(Level::Level0)),
        (Strategy::AdaptiveBoN, Some(Level::Level1)),
    ] {
        let chat = replay();
        let pipeline = Pipeline {
            template: &template,
            decomposition: &decomposition,
            chat: &chat,
            scorer: Some(&scorer),
            sampling: SamplingConfig::default(),
            score_with_evidence: false,
            deterministic: true,
        };
        let run = pipeline.run_claim(&claim, &evidence, &StrategyConfig::new(kind, 10), level)?;
        let label = match level {
            Some(l) => format!("{kind} (level {})", l.as_u8()),
            None => kind.to_string(),
        };
        println!(
            "{label:<22} -> {:<11} path {} of {}, {} llm calls",
            run.final_verdict().as_str(),
            run.chosen_index(),
            run.paths().len(),
            run.llm_calls()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
