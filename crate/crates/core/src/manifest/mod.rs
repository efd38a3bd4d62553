//! Example data model, manifest I/O, group-disjoint splitting and split audits.

mod corpus;
mod io;
mod leakage;
mod record;
mod split;
mod stats;
mod validate;

pub use corpus::{ClaimEntry, Corpus, Document};
pub use io::{manifest_to_string, parse_manifest, parse_manifest_str, read_manifest, write_manifest};
pub use leakage::{leakage_audit, CrossVariantLeak, DocumentOverlap, LeakageReport, WithinVariantLeak};
pub use record::{ConstructionFamily, EvidenceUnit, Label, ManifestRecord, ParseEnumError, Split, ValidationStatus};
pub use split::{group_disjoint_split, SplitAssignment, SplitRatios};
pub use stats::{split_statistics, SplitStats};
pub use validate::{rules, validate_against_corpus, validate_manifest, Violation};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: missing required field {field}")]
    MissingField { line: usize, field: &'static str },
    #[error("line {line}: label {value:?} is not one of SUPPORT, REFUTE, NEI")]
    InvalidLabel { line: usize, value: String },
    #[error("line {line}: invalid {field} value {value:?}")]
    InvalidField { line: usize, field: &'static str, value: String },
    #[error("duplicate example_id {id:?} on lines {first_line} and {second_line}")]
    DuplicateId { id: String, first_line: usize, second_line: usize },
    #[error("split ratios {ratios:?} must be non-negative and sum to 1")]
    InvalidRatios { ratios: [f64; 3] },
    #[error("insufficient-groups: {groups} groups cannot fill {buckets} non-empty splits")]
    InsufficientGroups { groups: usize, buckets: usize },
    #[error("corpus: {detail}")]
    Corpus { detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
