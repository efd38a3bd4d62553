use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::PredictionRecord;

/// Fraction of expected examples with exactly one prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub n_expected: usize,
    pub n_predicted_valid: usize,
    pub coverage: f64,
    pub missing: Vec<String>,
    pub duplicated: Vec<String>,
}

impl CoverageReport {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty() && self.duplicated.is_empty()
    }
}

/// An id predicted more than once counts toward neither the numerator nor
/// the missing list; it is reported as duplicated.
pub fn prediction_coverage<'a>(
    expected: impl IntoIterator<Item = &'a str>,
    preds: &[PredictionRecord],
) -> CoverageReport {
    let expected: BTreeSet<&str> = expected.into_iter().collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in preds {
        if expected.contains(p.example_id.as_str()) {
            *counts.entry(p.example_id.as_str()).or_default() += 1;
        }
    }
    let mut missing = Vec::new();
    let mut duplicated = Vec::new();
    let mut valid = 0;
    for id in &expected {
        match counts.get(id).copied().unwrap_or(0) {
            0 => missing.push(id.to_string()),
            1 => valid += 1,
            _ => duplicated.push(id.to_string()),
        }
    }
    let coverage = if expected.is_empty() { 0.0 } else { valid as f64 / expected.len() as f64 };
    CoverageReport { n_expected: expected.len(), n_predicted_valid: valid, coverage, missing, duplicated }
}
