//! Metrics, oracle upper bound, cost accounting and the drift judge.

mod cost;
mod judge;
mod metrics;
mod oracle;

use thiserror::Error;

use crate::http::TransportError;

pub use cost::{cost_report, CostReport, CostSummary};
pub use judge::{drift_summary, judge_batch, judge_drift, parse_judgment, DriftSummary, JudgeCase, Judgment};
pub use metrics::{cohen_kappa, compute_f1, evaluate, render_table, ConfusionMatrix, EvalReport};
pub use oracle::{oracle_verdict, upper_bound, UpperBound};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("nothing to evaluate")]
    EmptyEvaluation,
    #[error("label lists differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("no gold verdict for claim {0}")]
    MissingGold(String),
    #[error("claim {0} appears more than once")]
    DuplicateRun(String),
    #[error("run sets cover different claims ({0})")]
    CoverageMismatch(String),
    #[error("judge case field `{0}` is empty")]
    EmptyField(&'static str),
    #[error("unparseable judgment: {0}")]
    UnparseableJudgment(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
}
