use std::collections::BTreeMap;

use serde::Serialize;

use super::adjudication::{AdjudicationLabel, AdjudicationRecord, Subtype, CONSENSUS_ANNOTATOR};
use super::ValidateError;

/// A label with its optional subtype.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Judgment {
    #[serde(rename = "judgment")]
    pub label: AdjudicationLabel,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subtype: Option<Subtype>,
}

impl Judgment {
    pub fn of(r: &AdjudicationRecord) -> Self {
        Judgment { label: r.label, subtype: r.subtype }
    }

    /// Binary view: insufficient (hard-NEI candidate) versus contaminated.
    pub fn is_insufficient(&self) -> bool {
        self.label == AdjudicationLabel::TrulyInsufficient
    }

    /// Insufficient with a related-but-insufficient subtype.
    pub fn is_hard(&self) -> bool {
        self.is_insufficient() && self.subtype.is_some_and(Subtype::is_hard)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FinalLabel {
    pub item_id: String,
    #[serde(flatten)]
    pub judgment: Judgment,
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub item_id: String,
    pub a: Judgment,
    pub b: Judgment,
}

/// Result of merging two annotation streams.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsensusOutcome {
    pub n_items: usize,
    /// Finalized items in item-id order.
    pub finals: Vec<FinalLabel>,
    pub disagreements: Vec<Disagreement>,
    /// Disagreements without a resolution record.
    pub unresolved: Vec<String>,
    /// Same label and same subtype.
    pub raw_agreement: f64,
    /// Same top-level label.
    pub label_agreement: f64,
    /// Same insufficient-versus-contaminated call.
    pub binary_agreement: f64,
}

fn index(
    records: &[AdjudicationRecord],
) -> Result<BTreeMap<&str, &AdjudicationRecord>, ValidateError> {
    let mut out = BTreeMap::new();
    for r in records {
        r.check()?;
        if out.insert(r.item_id.as_str(), r).is_some() {
            return Err(ValidateError::DuplicateAnnotation {
                annotator_id: r.annotator_id.clone(),
                item_id: r.item_id.clone(),
            });
        }
    }
    Ok(out)
}

/// Merges two annotators. Agreeing items finalize at once; a disagreement
/// finalizes only through a resolution record from the `consensus`
/// annotator (the last one for an item wins). Resolutions for items that
/// were already agreed are ignored.
pub fn merge_consensus(
    a: &[AdjudicationRecord],
    b: &[AdjudicationRecord],
    resolutions: &[AdjudicationRecord],
) -> Result<ConsensusOutcome, ValidateError> {
    let ia = index(a)?;
    let ib = index(b)?;
    let missing_from_a: Vec<String> = ib.keys().filter(|k| !ia.contains_key(*k)).map(|k| k.to_string()).collect();
    let missing_from_b: Vec<String> = ia.keys().filter(|k| !ib.contains_key(*k)).map(|k| k.to_string()).collect();
    if !missing_from_a.is_empty() || !missing_from_b.is_empty() {
        return Err(ValidateError::CoverageMismatch { missing_from_a, missing_from_b });
    }
    let mut resolved: BTreeMap<&str, Judgment> = BTreeMap::new();
    for r in resolutions {
        r.check()?;
        if r.annotator_id != CONSENSUS_ANNOTATOR {
            return Err(ValidateError::BadResolution { item_id: r.item_id.clone(), annotator_id: r.annotator_id.clone() });
        }
        resolved.insert(r.item_id.as_str(), Judgment::of(r));
    }

    let n = ia.len();
    let (mut raw, mut top, mut binary) = (0usize, 0usize, 0usize);
    let mut out = ConsensusOutcome {
        n_items: n,
        finals: Vec::new(),
        disagreements: Vec::new(),
        unresolved: Vec::new(),
        raw_agreement: 0.0,
        label_agreement: 0.0,
        binary_agreement: 0.0,
    };
    for (item, ra) in &ia {
        let (ja, jb) = (Judgment::of(ra), Judgment::of(ib[item]));
        top += usize::from(ja.label == jb.label);
        binary += usize::from(ja.is_insufficient() == jb.is_insufficient());
        if ja == jb {
            raw += 1;
            out.finals.push(FinalLabel { item_id: item.to_string(), judgment: ja, resolved: false });
            continue;
        }
        out.disagreements.push(Disagreement { item_id: item.to_string(), a: ja, b: jb });
        match resolved.get(item) {
            Some(j) => out.finals.push(FinalLabel { item_id: item.to_string(), judgment: *j, resolved: true }),
            None => out.unresolved.push(item.to_string()),
        }
    }
    if n > 0 {
        out.raw_agreement = raw as f64 / n as f64;
        out.label_agreement = top as f64 / n as f64;
        out.binary_agreement = binary as f64 / n as f64;
    }
    Ok(out)
}
