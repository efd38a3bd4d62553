use std::collections::HashMap;

use serde::Serialize;

use super::consensus::ConsensusOutcome;
use super::packet::PacketKey;
use super::ValidateError;
use crate::manifest::{group_disjoint_split, ManifestRecord, Split, SplitRatios, ValidationStatus};

/// Held-out share of the hard subset.
pub const DEFAULT_TEST_RATIO: f64 = 0.28;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct HardSubset {
    /// Every hard record; its `split` says train or test.
    pub hard: Vec<ManifestRecord>,
    /// The held-out part of `hard`.
    pub test: Vec<ManifestRecord>,
}

/// Keeps finalized items judged `truly_insufficient` with a related subtype
/// (broad topic, near miss or partial), stamps them `valid_nei`, and holds
/// out a group-disjoint test share.
pub fn derive_hard_subset(
    outcome: &ConsensusOutcome,
    key: &PacketKey,
    candidates: &[ManifestRecord],
    test_ratio: f64,
    seed: u64,
) -> Result<HardSubset, ValidateError> {
    if !outcome.unresolved.is_empty() {
        return Err(ValidateError::Unresolved { items: outcome.unresolved.clone() });
    }
    let ratios = SplitRatios::new(1.0 - test_ratio, 0.0, test_ratio)?;
    let by_id: HashMap<&str, &ManifestRecord> = candidates.iter().map(|r| (r.example_id.as_str(), r)).collect();
    let mut hard = Vec::new();
    for f in outcome.finals.iter().filter(|f| f.judgment.is_hard()) {
        let example_id = key.example_of(&f.item_id).ok_or_else(|| ValidateError::UnknownItem { item_id: f.item_id.clone() })?;
        let source = by_id.get(example_id).ok_or_else(|| ValidateError::UnknownItem { item_id: f.item_id.clone() })?;
        let mut r = (*source).clone();
        r.validation_status = ValidationStatus::ValidNei;
        r.adjudicated_label = Some(f.judgment.label.to_string());
        if let Some(s) = f.judgment.subtype {
            r.extra.insert("adjudicated_subtype".into(), serde_json::Value::String(s.to_string()));
        }
        hard.push(r);
    }
    if hard.is_empty() {
        return Ok(HardSubset::default());
    }
    let assignment = group_disjoint_split(&hard, ratios, seed)?;
    for r in &mut hard {
        r.split = if assignment.get(&r.group_id) == Some(Split::Test) { Split::Test } else { Split::Train };
    }
    let test = hard.iter().filter(|r| r.split == Split::Test).cloned().collect();
    Ok(HardSubset { hard, test })
}
