use std::collections::BTreeMap;

use serde::Serialize;

use super::ConstructError;
use crate::manifest::{ConstructionFamily, Label, ManifestRecord, ValidationStatus};

/// One claim seen with its reference evidence and with adjudicated
/// insufficient evidence. Both sides share the claim's group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedClaimPair {
    pub claim_id: String,
    pub claim: String,
    pub group_id: String,
    pub reference: ManifestRecord,
    pub hard: ManifestRecord,
}

impl FixedClaimPair {
    pub fn reference_label(&self) -> Label {
        self.reference.label
    }
}

/// A record left without a partner, and which side it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Unpaired {
    pub example_id: String,
    pub claim_id: String,
    pub side: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FixedClaimPairs {
    pub pairs: Vec<FixedClaimPair>,
    pub unpaired: Vec<Unpaired>,
}

impl FixedClaimPairs {
    /// Both sides of every pair as manifest records, reference first.
    pub fn records(&self) -> Vec<ManifestRecord> {
        self.pairs.iter().flat_map(|p| [p.reference.clone(), p.hard.clone()]).collect()
    }
}

/// Pairs SUPPORT/REFUTE reference records with validated hard NEI records by
/// claim id. The hard side is relabelled `fixed_claim` (its original family
/// is kept under `paired_from`) and moved into the reference's group and
/// split. Extra records on either side are reported, not dropped silently.
pub fn make_fixed_claim_pairs(
    reference: &[ManifestRecord],
    hard: &[ManifestRecord],
) -> Result<FixedClaimPairs, ConstructError> {
    if let Some(r) = hard.iter().find(|r| r.validation_status != ValidationStatus::ValidNei) {
        return Err(ConstructError::NotAdjudicated {
            example_id: r.example_id.clone(),
            status: r.validation_status.to_string(),
        });
    }
    let mut refs: BTreeMap<&str, Vec<&ManifestRecord>> = BTreeMap::new();
    for r in reference.iter().filter(|r| r.label != Label::Nei) {
        refs.entry(r.claim_id.as_str()).or_default().push(r);
    }
    let mut hards: BTreeMap<&str, Vec<&ManifestRecord>> = BTreeMap::new();
    for r in hard {
        hards.entry(r.claim_id.as_str()).or_default().push(r);
    }
    let mut out = FixedClaimPairs::default();
    let unpaired = |r: &ManifestRecord, side| Unpaired { example_id: r.example_id.clone(), claim_id: r.claim_id.clone(), side };
    for (claim_id, rs) in &refs {
        let Some(hs) = hards.get(claim_id) else {
            out.unpaired.extend(rs.iter().map(|r| unpaired(r, "reference")));
            continue;
        };
        let reference = rs[0].clone();
        let mut h = hs[0].clone();
        h.extra.insert("paired_from".into(), serde_json::Value::String(h.construction.to_string()));
        h.construction = ConstructionFamily::FixedClaim;
        h.group_id = reference.group_id.clone();
        h.split = reference.split;
        out.pairs.push(FixedClaimPair {
            claim_id: claim_id.to_string(),
            claim: reference.claim.clone(),
            group_id: reference.group_id.clone(),
            reference,
            hard: h,
        });
        out.unpaired.extend(rs[1..].iter().map(|r| unpaired(r, "reference")));
        out.unpaired.extend(hs[1..].iter().map(|r| unpaired(r, "hard")));
    }
    for (claim_id, hs) in &hards {
        if !refs.contains_key(claim_id) {
            out.unpaired.extend(hs.iter().map(|r| unpaired(r, "hard")));
        }
    }
    Ok(out)
}
