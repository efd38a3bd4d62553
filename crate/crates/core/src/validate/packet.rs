use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::ValidateError;
use crate::manifest::{ConstructionFamily, Label, ManifestRecord, ValidationStatus};
use crate::rng;

/// What an annotator sees: nothing but an opaque id, the claim and the
/// evidence text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlindedItem {
    pub item_id: String,
    pub claim: String,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditPacket {
    pub packet_id: String,
    pub items: Vec<BlindedItem>,
}

impl AuditPacket {
    pub fn to_jsonl(&self) -> String {
        self.items.iter().map(|i| serde_json::to_string(i).expect("item serializes") + "\n").collect()
    }

    pub fn from_jsonl(packet_id: impl Into<String>, text: &str) -> Result<Self, ValidateError> {
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            items.push(
                serde_json::from_str(line).map_err(|e| ValidateError::Format { line: i + 1, detail: e.to_string() })?,
            );
        }
        Ok(AuditPacket { packet_id: packet_id.into(), items })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyEntry {
    pub item_id: String,
    pub example_id: String,
}

/// Item-to-example mapping, kept apart from the packet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketKey {
    pub packet_id: String,
    pub seed: u64,
    pub entries: Vec<KeyEntry>,
}

impl PacketKey {
    pub fn example_of(&self, item_id: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.item_id == item_id).map(|e| e.example_id.as_str())
    }
}

/// Field names that must never reach an annotator.
pub const FORBIDDEN_FIELDS: &[&str] = &[
    "label",
    "gold_label",
    "construction",
    "retrieval_method",
    "retrieval_rank",
    "bm25_score",
    "sentence_position",
    "validation_status",
    "adjudicated_label",
    "document_id",
    "sentence_ids",
    "example_id",
    "group_id",
    "source_data",
    "model_id",
    "pred_label",
    "p_support",
    "p_refute",
    "p_nei",
    "prediction",
];

/// Every forbidden field name, gold label value or construction family name
/// that occurs as a quoted JSON string in `json`.
pub fn blinding_violations(json: &str) -> Vec<String> {
    let labels = Label::ALL.iter().map(|l| l.as_str());
    let families = ConstructionFamily::ALL.iter().map(|f| f.as_str());
    FORBIDDEN_FIELDS
        .iter()
        .copied()
        .chain(labels)
        .chain(families)
        .filter(|name| json.contains(&format!("\"{name}\"")))
        .map(str::to_string)
        .collect()
}

/// Samples `n` candidates into a blinded packet plus its key.
///
/// Item ids are positions in the shuffled sample, so they carry nothing about
/// the source record.
pub fn build_audit_packet(
    candidates: &[ManifestRecord],
    n: usize,
    seed: u64,
    packet_id: &str,
) -> Result<(AuditPacket, PacketKey), ValidateError> {
    if let Some(r) = candidates.iter().find(|r| r.validation_status != ValidationStatus::Candidate) {
        return Err(ValidateError::NotCandidate {
            example_id: r.example_id.clone(),
            status: r.validation_status.to_string(),
        });
    }
    if n > candidates.len() {
        return Err(ValidateError::PacketTooLarge { n, available: candidates.len() });
    }
    let mut order: Vec<&ManifestRecord> = candidates.iter().collect();
    order.sort_by(|a, b| a.example_id.cmp(&b.example_id));
    order.shuffle(&mut rng::stream(seed, packet_id));
    order.truncate(n);
    let width = n.max(1).ilog10() as usize + 1;
    let mut items = Vec::with_capacity(n);
    let mut entries = Vec::with_capacity(n);
    for (i, r) in order.into_iter().enumerate() {
        let item_id = format!("{packet_id}-{i:0width$}");
        items.push(BlindedItem { item_id: item_id.clone(), claim: r.claim.clone(), evidence: r.evidence_text() });
        entries.push(KeyEntry { item_id, example_id: r.example_id.clone() });
    }
    Ok((AuditPacket { packet_id: packet_id.into(), items }, PacketKey { packet_id: packet_id.into(), seed, entries }))
}
