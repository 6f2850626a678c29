use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::ComplexityError;
use crate::types::{Level, RunRecord, Verdict};

/// One line of a levels file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub claim_id: String,
    pub level: Level,
}

/// Assigns training levels from a one-shot baseline run and a run with
/// decomposition: level 0 when the baseline was already right, level 1
/// otherwise (whether or not decomposition fixed it).
pub fn derive_levels(
    baseline: &[RunRecord],
    decomposed: &[RunRecord],
    gold: &HashMap<String, Verdict>,
) -> Result<BTreeMap<String, Level>, ComplexityError> {
    let base: BTreeMap<&str, &RunRecord> = baseline.iter().map(|r| (r.claim_id(), r)).collect();
    let dec: BTreeSet<&str> = decomposed.iter().map(|r| r.claim_id()).collect();
    let base_ids: BTreeSet<&str> = base.keys().copied().collect();
    if base_ids != dec {
        let diff: Vec<&str> = base_ids.symmetric_difference(&dec).take(5).copied().collect();
        return Err(ComplexityError::CoverageMismatch(diff.join(", ")));
    }
    base.into_iter()
        .map(|(id, run)| {
            let g = gold
                .get(id)
                .ok_or_else(|| ComplexityError::MissingGold(id.to_string()))?;
            let level = if run.final_verdict() == *g {
                Level::Level0
            } else {
                Level::Level1
            };
            Ok((id.to_string(), level))
        })
        .collect()
}
