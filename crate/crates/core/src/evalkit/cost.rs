use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::types::RunRecord;

/// Call and time totals of one run set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    /// Strategy name, or `mixed` when the runs disagree.
    pub strategy: String,
    pub claims: u64,
    pub llm_calls: u64,
    pub wall_ms: u64,
    pub mean_calls: f64,
    pub mean_ms: f64,
}

impl CostSummary {
    pub fn of(runs: &[RunRecord]) -> Self {
        let names: BTreeSet<&str> = runs.iter().map(|r| r.strategy().cli_name()).collect();
        let strategy = match names.len() {
            1 => names.into_iter().next().unwrap().to_string(),
            _ => "mixed".to_string(),
        };
        let claims = runs.len() as u64;
        let llm_calls = runs.iter().map(RunRecord::llm_calls).sum();
        let wall_ms = runs.iter().map(RunRecord::wall_ms).sum();
        let per = |x: u64| if claims == 0 { 0.0 } else { x as f64 / claims as f64 };
        CostSummary {
            strategy,
            claims,
            llm_calls,
            wall_ms,
            mean_calls: per(llm_calls),
            mean_ms: per(wall_ms),
        }
    }
}

/// Side-by-side cost of two run sets over the same claims. Ratios are
/// `b / a`; the wall-time ratio is absent when `a` recorded no time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub a: CostSummary,
    pub b: CostSummary,
    pub calls_ratio: f64,
    pub wall_ratio: Option<f64>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    strategy: &'a str,
    claims: u64,
    llm_calls: u64,
    wall_ms: u64,
    mean_ms: f64,
}

impl CostReport {
    /// Plot-ready rows: strategy, claims, llm_calls, wall_ms, mean_ms.
    pub fn write_csv(&self, w: impl Write) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        for s in [&self.a, &self.b] {
            out.serialize(CsvRow {
                strategy: &s.strategy,
                claims: s.claims,
                llm_calls: s.llm_calls,
                wall_ms: s.wall_ms,
                mean_ms: s.mean_ms,
            })?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn cost_report(runs_a: &[RunRecord], runs_b: &[RunRecord]) -> Result<CostReport, EvalError> {
    let ids_a: BTreeSet<&str> = runs_a.iter().map(RunRecord::claim_id).collect();
    let ids_b: BTreeSet<&str> = runs_b.iter().map(RunRecord::claim_id).collect();
    if ids_a != ids_b || ids_a.len() != runs_a.len() || ids_b.len() != runs_b.len() {
        let diff: Vec<&str> = ids_a.symmetric_difference(&ids_b).take(5).copied().collect();
        return Err(EvalError::CoverageMismatch(if diff.is_empty() {
            "duplicate claim ids".into()
        } else {
            diff.join(", ")
        }));
    }
    if runs_a.is_empty() {
        return Err(EvalError::EmptyEvaluation);
    }
    let a = CostSummary::of(runs_a);
    let b = CostSummary::of(runs_b);
    let calls_ratio = b.llm_calls as f64 / a.llm_calls as f64;
    let wall_ratio = (a.wall_ms > 0).then(|| b.wall_ms as f64 / a.wall_ms as f64);
    Ok(CostReport {
        a,
        b,
        calls_ratio,
        wall_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ReasoningPath, Strategy, Verdict};

    fn run(id: &str, strategy: Strategy, calls: u64, ms: u64) -> RunRecord {
        let paths = vec![ReasoningPath::new("", Verdict::True, ""); 1];
        RunRecord::new(id, strategy, vec![], paths, 0, Verdict::True, calls, ms).unwrap()
    }

    #[test]
    fn adaptive_versus_bon_at_m10() {
        let adaptive: Vec<_> = (0..10)
            .map(|i| run(&format!("c{i}"), Strategy::AdaptiveBoN, if i < 4 { 1 } else { 10 }, 5))
            .collect();
        let bon: Vec<_> = (0..10).map(|i| run(&format!("c{i}"), Strategy::BoN, 10, 9)).collect();
        let r = cost_report(&adaptive, &bon).unwrap();
        assert_eq!(r.a.llm_calls, 64);
        assert_eq!(r.a.mean_calls, 6.4);
        assert_eq!(r.calls_ratio, 1.5625);
        assert_eq!(r.wall_ratio, Some(1.8));
        assert_eq!(r.a.strategy, "adaptive");
    }

    #[test]
    fn self_comparison_and_coverage() {
        let runs = [run("a", Strategy::BoN, 10, 0), run("b", Strategy::BoN, 10, 0)];
        let r = cost_report(&runs, &runs).unwrap();
        assert_eq!(r.calls_ratio, 1.0);
        assert_eq!(r.wall_ratio, None);
        assert!(matches!(
            cost_report(&runs, &[run("x", Strategy::BoN, 1, 0), run("y", Strategy::BoN, 1, 0)]),
            Err(EvalError::CoverageMismatch(_))
        ));
        let dup = [run("a", Strategy::BoN, 1, 0), run("a", Strategy::BoN, 1, 0), run("b", Strategy::BoN, 1, 0)];
        assert!(cost_report(&runs, &dup).is_err());
    }

    #[test]
    fn csv_columns() {
        let runs = [run("a", Strategy::SelfConsistency, 10, 40), run("b", Strategy::Top1, 1, 10)];
        let r = cost_report(&runs, &runs).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("strategy,claims,llm_calls,wall_ms,mean_ms"));
        assert_eq!(lines.next(), Some("mixed,2,11,50,25.0"));
    }
}
