use serde::Serialize;

use super::adjudication::{AdjudicationLabel, Subtype};
use super::consensus::{ConsensusOutcome, Judgment};
use super::ValidateError;
use crate::metrics::{bootstrap_ci, BootstrapConfig, Interval};

/// Validity and contamination rates of a finalized pool.
///
/// `valid_nei_rate + contamination_rate = 1`, and the contamination
/// components (supported, refuted, ambiguous-or-invalid) sum to
/// `contamination_rate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationSummary {
    pub n_audited: usize,
    pub n_insufficient: usize,
    pub n_hard: usize,
    pub valid_nei_rate: Interval,
    pub contamination_rate: Interval,
    pub actually_supported_rate: Interval,
    pub actually_refuted_rate: Interval,
    pub ambiguous_invalid_rate: Interval,
    pub hard_rate_among_valid: Interval,
    pub topic_unrelated_rate_among_valid: Interval,
}

impl ValidationSummary {
    pub const CSV_HEADER: &'static str = "rate,estimate,low,high";

    pub fn rows(&self) -> [(&'static str, &Interval); 7] {
        [
            ("valid_nei", &self.valid_nei_rate),
            ("contamination", &self.contamination_rate),
            ("actually_supported", &self.actually_supported_rate),
            ("actually_refuted", &self.actually_refuted_rate),
            ("ambiguous_invalid", &self.ambiguous_invalid_rate),
            ("hard_among_valid", &self.hard_rate_among_valid),
            ("topic_unrelated_among_valid", &self.topic_unrelated_rate_among_valid),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for (name, i) in self.rows() {
            out.push_str(&format!("{name},{:.3},{:.3},{:.3}\n", i.estimate, i.low, i.high));
        }
        out
    }
}

fn share(items: &[Judgment], hit: impl Fn(&Judgment) -> bool) -> f64 {
    if items.is_empty() {
        return 0.0;
    }
    items.iter().filter(|j| hit(j)).count() as f64 / items.len() as f64
}

fn share_among_valid(items: &[Judgment], hit: impl Fn(&Judgment) -> bool) -> f64 {
    let valid: Vec<Judgment> = items.iter().copied().filter(Judgment::is_insufficient).collect();
    share(&valid, hit)
}

/// Rates over a fully finalized pool, each with an item-level percentile
/// bootstrap interval. Among-valid rates are 0 when nothing is valid.
pub fn validity_rates(outcome: &ConsensusOutcome, cfg: &BootstrapConfig) -> Result<ValidationSummary, ValidateError> {
    if !outcome.unresolved.is_empty() {
        return Err(ValidateError::Unresolved { items: outcome.unresolved.clone() });
    }
    let items: Vec<Judgment> = outcome.finals.iter().map(|f| f.judgment).collect();
    if items.is_empty() {
        return Err(ValidateError::Empty("finalized pool"));
    }
    let ci = |stat: &dyn Fn(&[Judgment]) -> f64| bootstrap_ci(&items, stat, cfg);
    let is = |l: AdjudicationLabel| move |j: &Judgment| j.label == l;
    Ok(ValidationSummary {
        n_audited: items.len(),
        n_insufficient: items.iter().filter(|j| j.is_insufficient()).count(),
        n_hard: items.iter().filter(|j| j.is_hard()).count(),
        valid_nei_rate: ci(&|s| share(s, Judgment::is_insufficient))?,
        contamination_rate: ci(&|s| share(s, |j| !j.is_insufficient()))?,
        actually_supported_rate: ci(&|s| share(s, is(AdjudicationLabel::ActuallySupported)))?,
        actually_refuted_rate: ci(&|s| share(s, is(AdjudicationLabel::ActuallyContradicted)))?,
        ambiguous_invalid_rate: ci(&|s| {
            share(s, |j| matches!(j.label, AdjudicationLabel::Ambiguous | AdjudicationLabel::InvalidOrUnreadable))
        })?,
        hard_rate_among_valid: ci(&|s| share_among_valid(s, Judgment::is_hard))?,
        topic_unrelated_rate_among_valid: ci(&|s| {
            share_among_valid(s, |j| j.subtype == Some(Subtype::TopicUnrelated))
        })?,
    })
}
