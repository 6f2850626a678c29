// Turn sampled paths into verifier training examples: each path is labelled
// 1 when its verdict matches gold. The positive rate equals path-level
// accuracy.
//
//     cargo run --example verifier_data

use std::error::Error;

use ttsfc::verifier::{build_training_data, positive_rate};
use ttsfc::{ClaimRecord, ReasoningPath, RunRecord, Strategy, Verdict};

pub fn run() -> Result<(), Box<dyn Error>> {
    let claims = vec![
        ClaimRecord::new("c1", "Crime doubled over the decade.", Some(Verdict::False))?,
        ClaimRecord::new("c2", "The mayor hired 500 officers.", Some(Verdict::Conflicting))?,
    ];
    let path = |v: Verdict, why: &str| ReasoningPath::new(why, v, "");
    let runs = vec![
        RunRecord::new(
            "c1",
            Strategy::SelfConsistency,
            vec!["d1".into()],
            vec![
                path(Verdict::False, "Reported crime rose 12 percent, not 100."),
                path(Verdict::False, "The figure is exaggerated."),
                path(Verdict::True, "Some categories doubled."),
            ],
            0,
            Verdict::False,
            3,
            0,
        )?,
        RunRecord::new(
            "c2",
            Strategy::SelfConsistency,
            vec!["d2".into()],
            vec![
                path(Verdict::True, "The budget funded 500 positions."),
                path(Verdict::Conflicting, "Positions were funded but not all filled."),
            ],
            0,
            Verdict::True,
            2,
            0,
        )?,
    ];
    let examples = build_training_data(&runs, &claims, None)?;
    for e in &examples {
        println!("label {}  {}", e.label, e.text.replace('\n', " | "));
    }
    println!("positive rate {:.2}", positive_rate(&examples).unwrap_or(0.0));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
