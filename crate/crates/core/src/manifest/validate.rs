use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::corpus::Corpus;
use super::record::{ConstructionFamily, Label, ManifestRecord, ValidationStatus};

/// One broken invariant. Violations are data; validation never fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub example_id: String,
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.example_id, self.rule, self.detail)
    }
}

pub mod rules {
    pub const DUPLICATE_ID: &str = "duplicate-example-id";
    pub const EMPTY_ID: &str = "empty-example-id";
    pub const NEI_NEEDS_FAMILY: &str = "nei-needs-family";
    pub const GOLD_NEEDS_REFERENCE: &str = "gold-label-needs-reference";
    pub const VALID_NEEDS_ADJUDICATION: &str = "valid-needs-adjudication";
    pub const EMPTY_EVIDENCE_LIST: &str = "empty-evidence-list";
    pub const EMPTY_EVIDENCE_TEXT: &str = "empty-evidence-text";
    pub const RETRIEVAL_RANK: &str = "retrieval-rank-positive";
    pub const CANDIDATE_ONLY: &str = "candidate-only-family";
    pub const NON_FINITE_SCORE: &str = "non-finite-bm25-score";
    pub const UNKNOWN_DOCUMENT: &str = "unknown-document";
    pub const SENTENCE_OUT_OF_RANGE: &str = "sentence-index-out-of-range";
}

/// Checks the record-level invariants of a manifest.
pub fn validate_manifest(records: &[ManifestRecord]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut push = |r: &ManifestRecord, rule: &'static str, detail: String| {
        out.push(Violation { example_id: r.example_id.clone(), rule, detail });
    };
    for (i, r) in records.iter().enumerate() {
        if r.example_id.is_empty() {
            push(r, rules::EMPTY_ID, format!("record {i}"));
        } else if let Some(first) = seen.insert(r.example_id.as_str(), i) {
            push(r, rules::DUPLICATE_ID, format!("records {first} and {i}"));
        }
        match (r.label, r.construction) {
            (Label::Nei, ConstructionFamily::Reference) => {
                push(r, rules::NEI_NEEDS_FAMILY, "NEI record marked as reference".into())
            }
            (Label::Support | Label::Refute, c) if c != ConstructionFamily::Reference => {
                push(r, rules::GOLD_NEEDS_REFERENCE, format!("{} record built by {c}", r.label))
            }
            _ => {}
        }
        if r.validation_status == ValidationStatus::ValidNei && r.adjudicated_label.is_none() {
            push(r, rules::VALID_NEEDS_ADJUDICATION, "valid_nei without adjudicated_label".into());
        }
        if r.validation_status == ValidationStatus::ValidNei && r.construction.is_candidate_only() {
            push(r, rules::CANDIDATE_ONLY, format!("{} cannot be valid_nei", r.construction));
        }
        if r.evidence.is_empty() {
            push(r, rules::EMPTY_EVIDENCE_LIST, "no evidence units".into());
        }
        if r.construction != ConstructionFamily::Placeholder {
            if let Some(pos) = r.evidence.iter().position(|u| u.text.trim().is_empty()) {
                push(r, rules::EMPTY_EVIDENCE_TEXT, format!("evidence unit {pos} is empty"));
            }
        }
        if r.retrieval_rank == Some(0) {
            push(r, rules::RETRIEVAL_RANK, "retrieval_rank must be >= 1".into());
        }
        if r.bm25_score.is_some_and(|s| !s.is_finite()) {
            push(r, rules::NON_FINITE_SCORE, "bm25_score is not finite".into());
        }
    }
    out
}

/// Checks that evidence provenance points at real sentences of the corpus.
pub fn validate_against_corpus(records: &[ManifestRecord], corpus: &Corpus) -> Vec<Violation> {
    let mut out = Vec::new();
    for r in records {
        for (u, unit) in r.evidence.iter().enumerate() {
            let Some(doc_id) = &unit.doc_id else { continue };
            let Some(doc) = corpus.documents.get(doc_id) else {
                out.push(Violation {
                    example_id: r.example_id.clone(),
                    rule: rules::UNKNOWN_DOCUMENT,
                    detail: format!("evidence unit {u} names {doc_id}"),
                });
                continue;
            };
            for &s in unit.sentence_ids.iter().flatten() {
                if s as usize >= doc.sentences.len() {
                    out.push(Violation {
                        example_id: r.example_id.clone(),
                        rule: rules::SENTENCE_OUT_OF_RANGE,
                        detail: format!("{doc_id} has {} sentences, unit {u} names {s}", doc.sentences.len()),
                    });
                }
            }
        }
    }
    out
}
