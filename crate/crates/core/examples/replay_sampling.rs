// Render the fact-checking prompt and sample reasoning paths from a replay
// table. Unparseable completions are dropped but still counted.
//
//     cargo run --example replay_sampling

use std::error::Error;

use ttsfc::gateway::{render_prompt, sample_paths, PromptTemplate, ReplayEntry, ReplayTransport, SamplingConfig};
use ttsfc::retrieval::EvidenceDoc;
use ttsfc::{ClaimRecord, Verdict};

pub fn run() -> Result<(), Box<dyn Error>> {
    let claim = ClaimRecord::new("c1", "The minimum wage has not changed since 2009.", Some(Verdict::True))?;
    let evidence = [EvidenceDoc::new("d1", "The federal minimum wage was last raised in July 2009.")];
    let messages = render_prompt(&PromptTemplate::fact_checking(), &claim, &evidence, None)?;
    println!("prompt: {} messages, last one:\n{}\n", messages.len(), messages.last().unwrap().content);

    let key = ReplayTransport::key_for(&messages);
    let completions = [
        "[Label]: True\n[Justification]: The last raise was in 2009.",
        "[Label]: SUPPORTS\n[Justification]: No federal increase since 2009.",
        "I am not sure.",
        "[Label]: Conflicting\n[Justification]: Many states raised their own wages.",
    ];
    let replay = ReplayTransport::new(completions.iter().enumerate().map(|(seq, c)| ReplayEntry {
        key_hash: key.clone(),
        seq: seq as u64,
        content: c.to_string(),
    }));

    let sampling = SamplingConfig {
        m: 4,
        ..SamplingConfig::default()
    };
    let outcome = sample_paths(&messages, &sampling, &replay)?;
    println!("{} completions, {} unparseable", outcome.completions, outcome.unparseable);
    for p in &outcome.paths {
        println!("  {:<11} {}", p.predicted.as_str(), p.justification);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
