use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::metrics::{check_unique_runs, compute_f1, gold_for, with_costs, ConfusionMatrix, EvalReport};
use super::EvalError;
use crate::strategies::select_majority;
use crate::types::{RunRecord, Verdict};

/// Quality under a perfect verifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    /// Fraction of claims with at least one correct path.
    pub accuracy: f64,
    pub report: EvalReport,
}

/// Oracle prediction for one run: gold if any path reaches it, otherwise
/// the majority verdict over the paths.
pub fn oracle_verdict(run: &RunRecord, gold: Verdict) -> Verdict {
    if run.paths().iter().any(|p| p.predicted == gold) {
        gold
    } else {
        select_majority(run.paths()).expect("run records hold at least one path").1
    }
}

/// Accuracy and F1 when the correct path is always picked if one exists.
pub fn upper_bound(runs: &[RunRecord], gold: &HashMap<String, Verdict>) -> Result<UpperBound, EvalError> {
    check_unique_runs(runs)?;
    let mut cm = ConfusionMatrix::default();
    for r in runs {
        let g = gold_for(gold, r)?;
        cm.add(g, oracle_verdict(r, g));
    }
    let report = with_costs(compute_f1(&cm)?, runs);
    Ok(UpperBound {
        accuracy: report.accuracy,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::evaluate;
    use crate::strategies::select_bon;
    use crate::types::{ReasoningPath, Strategy};
    use proptest::prelude::*;
    use Verdict::*;

    fn run_of(id: &str, vs: &[Verdict], strategy: Strategy, chosen: usize) -> RunRecord {
        let paths: Vec<_> = vs.iter().map(|&v| ReasoningPath::new("", v, "")).collect();
        RunRecord::new(id, strategy, vec![], paths, chosen, vs[chosen], vs.len() as u64, 0).unwrap()
    }

    fn gold_map(pairs: &[(&str, Verdict)]) -> HashMap<String, Verdict> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn seven_of_ten_have_a_correct_path() {
        let mut runs = Vec::new();
        let mut gold = Vec::new();
        for i in 0..10 {
            let id = format!("c{i}");
            let vs = if i < 7 { [False, True, False] } else { [False, False, Conflicting] };
            runs.push(run_of(&id, &vs, Strategy::BoN, 0));
            gold.push((id, True));
        }
        let gold: HashMap<String, Verdict> = gold.into_iter().collect();
        let ub = upper_bound(&runs, &gold).unwrap();
        assert_eq!(ub.accuracy, 0.7);
        // fallback predictions are the majority verdict, False
        assert_eq!(ub.report.confusion.counts[0], [7, 3, 0]);
    }

    #[test]
    fn all_claims_reachable_gives_one() {
        let runs = [run_of("a", &[False, True], Strategy::BoN, 0), run_of("b", &[Conflicting], Strategy::BoN, 0)];
        let ub = upper_bound(&runs, &gold_map(&[("a", True), ("b", Conflicting)])).unwrap();
        assert_eq!(ub.accuracy, 1.0);
        assert_eq!(ub.report.macro_f1, 2.0 / 3.0);
    }

    fn verdict() -> impl proptest::strategy::Strategy<Value = Verdict> {
        prop::sample::select(Verdict::ALL.to_vec())
    }

    /// Claims, each with gold, paths and per-path scores.
    fn run_set(max_m: usize) -> impl proptest::strategy::Strategy<Value = Vec<(Verdict, Vec<(Verdict, f64)>)>> {
        prop::collection::vec(
            (verdict(), prop::collection::vec((verdict(), 0.0f64..1.0), 1..=max_m)),
            1..20,
        )
    }

    fn materialise(set: &[(Verdict, Vec<(Verdict, f64)>)]) -> (Vec<RunRecord>, Vec<RunRecord>, HashMap<String, Verdict>) {
        let mut bon = Vec::new();
        let mut sc = Vec::new();
        let mut gold = HashMap::new();
        for (i, (g, paths)) in set.iter().enumerate() {
            let id = format!("c{i}");
            let vs: Vec<Verdict> = paths.iter().map(|p| p.0).collect();
            let scores: Vec<f64> = paths.iter().map(|p| p.1).collect();
            let rp: Vec<ReasoningPath> = vs.iter().map(|&v| ReasoningPath::new("", v, "")).collect();
            let (b, _) = select_bon(&rp, &scores).unwrap();
            let (s, _) = select_majority(&rp).unwrap();
            bon.push(run_of(&id, &vs, Strategy::BoN, b));
            sc.push(run_of(&id, &vs, Strategy::SelfConsistency, s));
            gold.insert(id, *g);
        }
        (bon, sc, gold)
    }

    proptest! {
        #[test]
        fn oracle_dominates_bon_and_sc(set in run_set(10)) {
            let (bon, sc, gold) = materialise(&set);
            let ub = upper_bound(&bon, &gold).unwrap().accuracy;
            prop_assert!(ub >= evaluate(&bon, &gold).unwrap().accuracy);
            prop_assert!(ub >= evaluate(&sc, &gold).unwrap().accuracy);
        }

        #[test]
        fn single_path_collapses_to_top1(set in run_set(1)) {
            let (bon, sc, gold) = materialise(&set);
            let ub = upper_bound(&bon, &gold).unwrap();
            prop_assert_eq!(ub.accuracy, evaluate(&bon, &gold).unwrap().accuracy);
            prop_assert_eq!(ub.accuracy, evaluate(&sc, &gold).unwrap().accuracy);
        }
    }

    #[test]
    fn missing_gold() {
        let runs = [run_of("a", &[True], Strategy::Top1, 0)];
        assert!(matches!(upper_bound(&runs, &HashMap::new()), Err(EvalError::MissingGold(_))));
    }
}
