// Per-class, macro and weighted F1, the perfect-verifier upper bound, and
// Cohen's kappa between two annotators.
//
//     cargo run --example eval_metrics

use std::collections::HashMap;
use std::error::Error;

use ttsfc::evalkit::{cohen_kappa, evaluate, render_table, upper_bound};
use ttsfc::strategies::select_majority;
use ttsfc::{ReasoningPath, RunRecord, Strategy, Verdict};

use Verdict::{Conflicting as C, False as F, True as T};

pub fn run() -> Result<(), Box<dyn Error>> {
    // (gold, sampled verdicts)
    let cases = [
        (T, vec![T, T, F]),
        (T, vec![F, F, T]),
        (F, vec![F, C, F]),
        (F, vec![T, T, T]),
        (C, vec![C, F, F]),
        (C, vec![C, C, T]),
        (F, vec![F, F, F]),
    ];
    let mut gold = HashMap::new();
    let mut runs = Vec::new();
    for (i, (g, verdicts)) in cases.iter().enumerate() {
        let id = format!("c{i}");
        gold.insert(id.clone(), *g);
        let paths: Vec<ReasoningPath> = verdicts.iter().map(|&v| ReasoningPath::new("", v, "")).collect();
        let (chosen, verdict) = select_majority(&paths)?;
        runs.push(RunRecord::new(id, Strategy::SelfConsistency, vec![], paths, chosen, verdict, 3, 0)?);
    }

    let report = evaluate(&runs, &gold)?;
    let ub = upper_bound(&runs, &gold)?;
    print!("{}", render_table(&[("sc", &report), ("upper bound", &ub.report)]));
    println!("accuracy {:.3}, upper bound {:.3}", report.accuracy, ub.accuracy);

    let annotator_a = [1, 1, 0, 1, 0, 0, 1, 1];
    let annotator_b = [1, 0, 0, 1, 0, 1, 1, 1];
    println!("kappa {:.2}", cohen_kappa(&annotator_a, &annotator_b)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
