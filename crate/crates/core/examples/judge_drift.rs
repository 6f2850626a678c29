// Ask a judge model whether verifier-guided reasoning stayed on the
// evidence, then summarise the drift rate. The judge here is a replay
// table.
//
//     cargo run --example judge_drift

use std::error::Error;

use ttsfc::evalkit::{drift_summary, judge_batch, JudgeCase};
use ttsfc::gateway::{FrameTemplate, ReplayEntry, ReplayTransport, SamplingConfig};

pub fn run() -> Result<(), Box<dyn Error>> {
    let template = FrameTemplate::judge();
    let cases: Vec<JudgeCase> = (0..3)
        .map(|i| JudgeCase {
            id: Some(format!("j{i}")),
            claim: format!("Claim {i}."),
            evidence: "The report gives 3.1 percent.".into(),
            gold: "True".into(),
            reasoning_without: "Unemployment is usually higher, so false.".into(),
            reasoning_with: "The report states 3.1 percent, matching the claim.".into(),
            prediction_without: Some("False".into()),
            prediction_with: Some("True".into()),
        })
        .collect();

    // answer each rendered judge prompt; the second case is judged a draw
    let sampling = SamplingConfig::default();
    let entries = cases.iter().enumerate().map(|(i, c)| {
        let messages = template.render(&[
            ("claim", &c.claim),
            ("evidence", &c.evidence),
            ("gold", &c.gold),
            ("reasoning_without", &c.reasoning_without),
            ("prediction_without", c.prediction_without.as_deref().unwrap_or("")),
            ("reasoning_with", &c.reasoning_with),
            ("prediction_with", c.prediction_with.as_deref().unwrap_or("")),
        ]);
        let label = if i == 1 { 0 } else { 1 };
        ReplayEntry {
            key_hash: ReplayTransport::key_for(&messages),
            seq: 0,
            content: format!("[Label]: {label}\n[Explanation]: judged case {i}"),
        }
    });
    let judge = ReplayTransport::new(entries);
    let judgments = judge_batch(&cases, &template, &sampling, &judge)?;
    for j in &judgments {
        println!("{:?}: label {} ({})", j.id, j.label, j.explanation);
    }
    let summary = drift_summary(&judgments)?;
    println!("drift avoided in {}/{} cases ({:.1}%)", summary.label_one, summary.cases, 100.0 * summary.drift_rate);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
