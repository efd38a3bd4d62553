//! Human validation: blinded packets, dual-annotator consensus, validity
//! rates and the adjudicated hard subset.

mod adjudication;
mod consensus;
mod hard;
mod packet;
mod rates;

pub use adjudication::{parse_annotations, write_annotations, AdjudicationLabel, AdjudicationRecord, Subtype, CONSENSUS_ANNOTATOR};
pub use consensus::{merge_consensus, ConsensusOutcome, Disagreement, FinalLabel, Judgment};
pub use hard::{derive_hard_subset, HardSubset, DEFAULT_TEST_RATIO};
pub use packet::{blinding_violations, build_audit_packet, AuditPacket, BlindedItem, KeyEntry, PacketKey, FORBIDDEN_FIELDS};
pub use rates::{validity_rates, ValidationSummary};

use thiserror::Error;

use crate::manifest::ManifestError;
use crate::metrics::MetricsError;

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error("record {example_id} is {status}; packets are drawn from candidates only")]
    NotCandidate { example_id: String, status: String },
    #[error("packet of {n} requested from {available} candidates")]
    PacketTooLarge { n: usize, available: usize },
    #[error("invalid annotation for {item_id}: {detail}")]
    InvalidAnnotation { item_id: String, detail: String },
    #[error("annotator {annotator_id} labelled {item_id} twice")]
    DuplicateAnnotation { annotator_id: String, item_id: String },
    #[error("annotators cover different items; missing from a: {missing_from_a:?}, missing from b: {missing_from_b:?}")]
    CoverageMismatch { missing_from_a: Vec<String>, missing_from_b: Vec<String> },
    #[error("resolution for {item_id} comes from {annotator_id}, expected \"consensus\"")]
    BadResolution { item_id: String, annotator_id: String },
    #[error("{} item(s) still unresolved: {}", items.len(), items.join(", "))]
    Unresolved { items: Vec<String> },
    #[error("item {item_id} is not in the packet key")]
    UnknownItem { item_id: String },
    #[error("annotation line {line}: {detail}")]
    Format { line: usize, detail: String },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
