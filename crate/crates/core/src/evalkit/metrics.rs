use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::types::{RunRecord, Verdict};

/// 3x3 counts; rows are gold, columns predicted, both in True/False/Conflicting
/// order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; 3]; 3]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Verdict, Verdict)>) -> Self {
        let mut cm = ConfusionMatrix::default();
        for (gold, predicted) in pairs {
            cm.add(gold, predicted);
        }
        cm
    }

    pub fn add(&mut self, gold: Verdict, predicted: Verdict) {
        self.counts[gold.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..3).map(|k| self.counts[k][k]).sum()
    }

    /// Gold count per class.
    pub fn support(&self) -> [u64; 3] {
        [0, 1, 2].map(|k| self.counts[k].iter().sum())
    }

    /// F1 of class `k`; zero when the class never occurs in gold or
    /// predictions, or when it is never predicted correctly.
    pub fn f1(&self, k: usize) -> f64 {
        let tp = self.counts[k][k] as f64;
        let fp = (0..3).filter(|&g| g != k).map(|g| self.counts[g][k]).sum::<u64>() as f64;
        let fn_ = (0..3).filter(|&p| p != k).map(|p| self.counts[k][p]).sum::<u64>() as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        }
    }
}

/// Classification quality plus call and time totals for one run set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub t_f1: f64,
    pub f_f1: f64,
    pub c_f1: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub accuracy: f64,
    /// Gold counts in True/False/Conflicting order.
    pub support: [u64; 3],
    pub total: u64,
    pub confusion: ConfusionMatrix,
    pub llm_calls_total: u64,
    pub wall_ms_total: u64,
    pub mean_wall_ms: f64,
}

/// Per-class, macro and support-weighted F1 from a confusion matrix. Cost
/// fields are left at zero.
pub fn compute_f1(cm: &ConfusionMatrix) -> Result<EvalReport, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyEvaluation);
    }
    let f1 = [0, 1, 2].map(|k| cm.f1(k));
    let support = cm.support();
    let weighted = (0..3).map(|k| support[k] as f64 / total as f64 * f1[k]).sum();
    Ok(EvalReport {
        t_f1: f1[0],
        f_f1: f1[1],
        c_f1: f1[2],
        macro_f1: (f1[0] + f1[1] + f1[2]) / 3.0,
        weighted_f1: weighted,
        accuracy: cm.correct() as f64 / total as f64,
        support,
        total,
        confusion: *cm,
        llm_calls_total: 0,
        wall_ms_total: 0,
        mean_wall_ms: 0.0,
    })
}

pub(crate) fn check_unique_runs(runs: &[RunRecord]) -> Result<(), EvalError> {
    let mut seen = HashSet::new();
    for r in runs {
        if !seen.insert(r.claim_id()) {
            return Err(EvalError::DuplicateRun(r.claim_id().to_string()));
        }
    }
    Ok(())
}

pub(crate) fn gold_for(gold: &HashMap<String, Verdict>, run: &RunRecord) -> Result<Verdict, EvalError> {
    gold.get(run.claim_id())
        .copied()
        .ok_or_else(|| EvalError::MissingGold(run.claim_id().to_string()))
}

pub(crate) fn with_costs(mut report: EvalReport, runs: &[RunRecord]) -> EvalReport {
    report.llm_calls_total = runs.iter().map(RunRecord::llm_calls).sum();
    report.wall_ms_total = runs.iter().map(RunRecord::wall_ms).sum();
    report.mean_wall_ms = report.wall_ms_total as f64 / runs.len() as f64;
    report
}

/// Scores each run's final verdict against gold.
pub fn evaluate(runs: &[RunRecord], gold: &HashMap<String, Verdict>) -> Result<EvalReport, EvalError> {
    check_unique_runs(runs)?;
    let mut cm = ConfusionMatrix::default();
    for r in runs {
        cm.add(gold_for(gold, r)?, r.final_verdict());
    }
    Ok(with_costs(compute_f1(&cm)?, runs))
}

/// Cohen's kappa between two annotators, on a 0-100 scale. When chance
/// agreement is certain, returns 100 for perfect agreement and 0 otherwise.
pub fn cohen_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.is_empty() {
        return Err(EvalError::EmptyEvaluation);
    }
    let n = a.len() as f64;
    let mut marginals: BTreeMap<&T, (u64, u64)> = BTreeMap::new();
    let mut agree = 0u64;
    for (x, y) in a.iter().zip(b) {
        marginals.entry(x).or_default().0 += 1;
        marginals.entry(y).or_default().1 += 1;
        agree += u64::from(x == y);
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = marginals
        .values()
        .map(|&(ca, cb)| (ca as f64 / n) * (cb as f64 / n))
        .sum();
    if p_e == 1.0 {
        return Ok(if p_o == 1.0 { 100.0 } else { 0.0 });
    }
    Ok(100.0 * ((p_o - p_e) / (1.0 - p_e)))
}

/// Aligned text table with one row per labelled report, F1 values in percent.
pub fn render_table(rows: &[(&str, &EvalReport)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max("run".len());
    let mut out = format!("{:<width$}  {:>6}  {:>6}  {:>6}  {:>6}  {:>6}\n", "run", "T-F1", "F-F1", "C-F1", "M-F1", "W-F1");
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>6.2}  {:>6.2}  {:>6.2}  {:>6.2}  {:>6.2}",
            name,
            100.0 * r.t_f1,
            100.0 * r.f_f1,
            100.0 * r.c_f1,
            100.0 * r.macro_f1,
            100.0 * r.weighted_f1
        );
    }
    out
}
