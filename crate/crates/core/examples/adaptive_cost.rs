// Adaptive best-of-N spends one call on easy (level 0) claims and the full
// budget on hard ones. With 40% easy claims and m = 10 that is 6.4 calls
// per claim instead of 10.
//
//     cargo run --example adaptive_cost

use std::collections::HashMap;
use std::error::Error;

use ttsfc::evalkit::cost_report;
use ttsfc::gateway::{FrameTemplate, PromptTemplate, ReplayEntry, ReplayTransport, SamplingConfig, WILDCARD_KEY};
use ttsfc::retrieval::EvidenceDoc;
use ttsfc::strategies::{adaptive_generation_calls, Pipeline, StrategyConfig};
use ttsfc::verifier::{ScoreError, ScoreItem, ScoringProvider};
use ttsfc::{ClaimRecord, Level, RunRecord, Strategy, Verdict};

struct LengthScorer;

impl ScoringProvider for LengthScorer {
    fn score(&self, items: &[ScoreItem]) -> Result<Vec<f64>, ScoreError> {
        Ok(items.iter().map(|it| (it.reasoning.len() % 10) as f64 / 10.0).collect())
    }
}

fn run_all(kind: Strategy, claims: &[ClaimRecord], levels: &HashMap<String, Level>) -> Result<Vec<RunRecord>, Box<dyn Error>> {
    let chat = ReplayTransport::new((0..10).map(|seq| ReplayEntry {
        key_hash: WILDCARD_KEY.into(),
        seq,
        content: format!("[Label]: {}\n[Justification]: reading number {seq}", if seq % 3 == 0 { "True" } else { "False" }),
    }));
    let (template, decomposition) = (PromptTemplate::fact_checking(), FrameTemplate::decomposition());
    let pipeline = Pipeline {
        template: &template,
        decomposition: &decomposition,
        chat: &chat,
        scorer: Some(&LengthScorer),
        sampling: SamplingConfig::default(),
        score_with_evidence: false,
        deterministic: true,
    };
    let evidence: HashMap<String, Vec<EvidenceDoc>> =
        claims.iter().map(|c| (c.id.clone(), vec![EvidenceDoc::new("d", "Some evidence.")])).collect();
    let results = pipeline.run_batch(claims, &evidence, &StrategyConfig::new(kind, 10), Some(levels), 4);
    Ok(results.into_iter().collect::<Result<_, _>>()?)
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let claims: Vec<ClaimRecord> = (0..50)
        .map(|i| ClaimRecord::new(format!("c{i}"), format!("Claim {i}."), Some(Verdict::False)))
        .collect::<Result<_, _>>()?;
    let levels: HashMap<String, Level> = claims
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.clone(), if i % 5 < 2 { Level::Level0 } else { Level::Level1 }))
        .collect();
    let planned = adaptive_generation_calls(levels.values().copied(), &StrategyConfig::new(Strategy::AdaptiveBoN, 10));
    println!("planned adaptive calls: {planned}");

    let adaptive = run_all(Strategy::AdaptiveBoN, &claims, &levels)?;
    let bon = run_all(Strategy::BoN, &claims, &levels)?;
    let report = cost_report(&adaptive, &bon)?;
    println!("{:<9} {:>6} calls  {:.1} per claim", report.a.strategy, report.a.llm_calls, report.a.mean_calls);
    println!("{:<9} {:>6} calls  {:.1} per claim", report.b.strategy, report.b.llm_calls, report.b.mean_calls);
    println!("bon / adaptive = {}", report.calls_ratio);
    report.write_csv(std::io::stdout())?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
