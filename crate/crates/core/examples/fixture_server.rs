// Serve the scoring, chat and embeddings contracts from fixtures so HTTP
// clients (including the model adapters) can be tested offline.
//
//     cargo run --example fixture_server              # self-test and exit
//     cargo run --example fixture_server -- serve 127.0.0.1:8089

use std::collections::HashMap;
use std::error::Error;
use std::time::Duration;

use ttsfc::fixture_server::{FixtureServer, Fixtures};
use ttsfc::gateway::ReplayTransport;
use ttsfc::http::{JsonClient, RetryPolicy};
use ttsfc::verifier::{FixtureScore, HttpScorer, ScoreItem, ScoringProvider};
use ttsfc::{jsonl, Verdict};

fn e2e_fixtures() -> Result<Fixtures, Box<dyn Error>> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e");
    let scores: HashMap<String, f64> =
        jsonl::read::<FixtureScore>(dir.join("scores.jsonl"))?.into_iter().map(|s| (s.key, s.score)).collect();
    Ok(Fixtures {
        scores,
        chat: Some(ReplayTransport::load(dir.join("replay.jsonl"))?),
        ..Default::default()
    })
}

pub fn run() -> Result<(), Box<dyn Error>> {
    // the first request fails with 503 to show the client retrying
    let server = FixtureServer::start("127.0.0.1:0", e2e_fixtures()?.with_failures(1, 503))?;
    println!("serving on {}", server.url());
    let retry = RetryPolicy {
        max_retries: 2,
        base_backoff: Duration::from_millis(10),
    };
    let scorer = HttpScorer::new(&server.url(), JsonClient::new(None, retry, Duration::from_secs(5)));
    let items: Vec<ScoreItem> = Verdict::ALL
        .iter()
        .map(|&verdict| ScoreItem {
            claim: "A claim.".into(),
            reasoning: format!("It is {}.", verdict.as_str()),
            verdict,
            evidence: None,
        })
        .collect();
    let scores = scorer.score(&items)?;
    println!("scores {scores:.4?} after {} requests", server.requests());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        Some("serve") => {
            let addr = args.get(1).map_or("127.0.0.1:8089", String::as_str);
            let server = FixtureServer::start(addr, e2e_fixtures()?)?;
            eprintln!("serving e2e fixtures on {}", server.url());
            server.wait();
            Ok(())
        }
        _ => run(),
    }
}
