//! Evidence-side shallow features, per-construction summaries and the
//! separability probe.

mod features;
mod lexicon;
mod separability;
mod summary;

pub use features::{overlap_stats, shallow_features, shallow_features_parts, split_sentences, ShallowFeatureVector, FEATURE_NAMES};
pub use lexicon::{Lexicons, CONTEXT_MARKERS, DEFAULT_PLACEHOLDER_MARKER, METHOD_MARKERS, STOPWORDS};
pub use separability::{fold_assignment, separability_probe, ProbeStatus, SeparabilityConfig, SeparabilityResult};
pub use summary::{audit_summary, FamilySummary};

use thiserror::Error;

use crate::probe::ProbeError;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("separability probe needs non-empty groups; {0} is empty")]
    EmptyGroup(&'static str),
    #[error("feature vectors have inconsistent lengths ({expected} vs {found})")]
    Ragged { expected: usize, found: usize },
    #[error("{0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Probe(#[from] ProbeError),
}
