// Regenerates the offline end-to-end fixture set under
// `tests/fixtures/e2e/` (or the directory given as the first argument).
//
// The set is 20 claims with retrieved evidence, complexity levels (8 level
// 0, 12 level 1), ten replayed chat completions per claim keyed by the
// exact rendered prompt, and verifier scores keyed by the framed paths. `plan.json`
// records the intended verdict and score of every path so metrics can be
// recomputed without this crate (`oracle.py`).
//
//     cargo run --example e2e_fixtures

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use ttsfc::complexity::LevelRecord;
use ttsfc::gateway::{render_prompt, PromptTemplate, ReplayEntry, ReplayTransport};
use ttsfc::jsonl;
use ttsfc::retrieval::{EvidenceHit, RankedEvidence};
use ttsfc::verifier::{FixtureScore, ScoreItem};
use ttsfc::{ClaimRecord, Level, Verdict};

const M: usize = 10;

const TOPICS: [&str; 20] = [
    "the city's unemployment rate fell to 3.1 percent last year",
    "the state spent 40 percent of its budget on education",
    "the senator voted against every infrastructure bill since 2015",
    "crime in the county doubled over the past decade",
    "the new law bans all plastic bags statewide",
    "wind power supplied a quarter of the region's electricity",
    "the governor cut property taxes for 2 million homeowners",
    "average rent rose 18 percent in two years",
    "the bridge project came in 300 million dollars over budget",
    "half of all new jobs were part-time positions",
    "the company paid no federal income tax in 2020",
    "teacher salaries are the lowest in the nation",
    "the vaccine was tested on fewer than 1,000 people",
    "the minimum wage has not changed since 2009",
    "the river's pollution levels dropped by 60 percent",
    "more than 100 million people have preexisting conditions",
    "the mayor hired 500 new police officers",
    "imports from the country tripled after the trade deal",
    "the district closed 12 schools in one year",
    "the program cut wait times at clinics in half",
];

fn wire(v: Verdict, variant: usize) -> &'static str {
    match (v, variant % 2) {
        (Verdict::True, 0) => "True",
        (Verdict::True, _) => "SUPPORTS",
        (Verdict::False, 0) => "False",
        (Verdict::False, _) => "REFUTES",
        (Verdict::Conflicting, 0) => "Conflicting",
        (Verdict::Conflicting, _) => "CONFLICTING",
    }
}

/// Writes the whole fixture set into `dir`.
pub fn generate(dir: &Path) -> Result<(), Box<dyn std::error::Error>> {
    std::fs::create_dir_all(dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(20_241_016);
    let template = PromptTemplate::fact_checking();

    let mut claims = Vec::new();
    let mut evidence = Vec::new();
    let mut levels = Vec::new();
    let mut replay = Vec::new();
    let mut scores = Vec::new();
    let mut plan = Vec::new();

    for (i, topic) in TOPICS.iter().enumerate() {
        let id = format!("e2e-{i:02}");
        let gold = Verdict::ALL[i % 3];
        let claim = ClaimRecord::new(&id, format!("A politician says {topic}."), Some(gold))?;
        let level = if i % 5 == 0 || i % 5 == 2 { Level::Level0 } else { Level::Level1 };

        let hits: Vec<EvidenceHit> = (0..3)
            .map(|k| EvidenceHit {
                doc_id: format!("doc-{i:02}-{k}"),
                score: 1.0 - 0.1 * k as f64,
                title: None,
                text: Some(format!("Report {k} on whether {topic}: figures vary by source and year.")),
            })
            .collect();
        let ranked = RankedEvidence {
            claim_id: id.clone(),
            hits,
        };
        let messages = render_prompt(&template, &claim, &ranked.documents(), None)?;
        let key = ReplayTransport::key_for(&messages);

        // every claim gets M completions so a plain best-of-N run can replay
        // the same fixture; adaptive level-0 claims read only the first
        let mut planned = Vec::new();
        for j in 0..M {
            // one malformed completion exercises the drop-and-count path
            if i == 6 && j == 3 {
                replay.push(ReplayEntry {
                    key_hash: key.clone(),
                    seq: j as u64,
                    content: "I cannot determine a verdict from this evidence.".into(),
                });
                planned.push(json!({"verdict": null, "score": null}));
                continue;
            }
            let verdict = if rng.gen_bool(0.45) {
                gold
            } else {
                Verdict::ALL[rng.gen_range(0..3)]
            };
            let justification = format!("Path {j} for {id}: the sources weigh {} on this claim.", verdict.as_wire());
            replay.push(ReplayEntry {
                key_hash: key.clone(),
                seq: j as u64,
                content: format!("[Label]: {}\n[Justification]: {justification}", wire(verdict, i + j)),
            });
            let score = (rng.gen_range(0.0..1.0f64) * 1e4).round() / 1e4;
            let item = ScoreItem {
                claim: claim.claim.clone(),
                reasoning: justification,
                verdict,
                evidence: None,
            };
            scores.push(FixtureScore { key: item.key(), score });
            planned.push(json!({"verdict": verdict.as_str(), "score": score}));
        }
        plan.push(json!({"claim_id": id, "level": level.as_u8(), "paths": planned}));
        claims.push(claim);
        evidence.push(ranked);
        levels.push(LevelRecord { claim_id: id, level });
    }

    jsonl::write(dir.join("claims.jsonl"), &claims)?;
    jsonl::write(dir.join("evidence.jsonl"), &evidence)?;
    jsonl::write(dir.join("levels.jsonl"), &levels)?;
    jsonl::write(dir.join("replay.jsonl"), &replay)?;
    jsonl::write(dir.join("scores.jsonl"), &scores)?;
    std::fs::write(dir.join("plan.json"), serde_json::to_string_pretty(&plan)? + "\n")?;
    println!("wrote {} claims, {} completions, {} scores to {}", claims.len(), replay.len(), scores.len(), dir.display());
    Ok(())
}

/// Regenerates into a scratch directory and checks the committed fixtures
/// are byte-identical.
pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let scratch = std::env::temp_dir().join(format!("ttsfc-e2e-{}", std::process::id()));
    generate(&scratch)?;
    let committed = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e");
    for name in ["claims.jsonl", "evidence.jsonl", "levels.jsonl", "replay.jsonl", "scores.jsonl", "plan.json"] {
        if std::fs::read(scratch.join(name))? != std::fs::read(committed.join(name))? {
            return Err(format!("{name} differs from the committed fixture").into());
        }
    }
    std::fs::remove_dir_all(&scratch)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e"));
    generate(&dir)
}
