//! Scores over gold manifests and prediction logs.
//!
//! Every function here is pure. Functions that need one prediction per gold
//! example check [`prediction_coverage`] first and refuse to produce a number
//! when coverage is incomplete.

mod aggregate;
mod bootstrap;
mod classification;
mod coverage;
mod fixed_claim;
mod one_class;
mod prediction;

pub use aggregate::{drop_summary, seed_aggregate, DropRow, NeiF1Matrix, SeedSummary};
pub use bootstrap::{bootstrap_ci, bootstrap_ci_grouped, BootstrapConfig, Interval, ResampleMode};
pub use classification::{
    classification_from_labels, classification_metrics, ClassificationReport, ConfusionMatrix, LabelScores,
};
pub use coverage::{prediction_coverage, CoverageReport};
pub use fixed_claim::{fixed_claim_diagnostics, FixedClaimReport, PairOutcome};
pub use one_class::{one_class_metrics, OneClassIntervals, OneClassReport};
pub use prediction::{argmax_label, parse_predictions, read_predictions, write_predictions, PredictionRecord};

use thiserror::Error;

use crate::manifest::ConstructionFamily;

/// Tolerance on the probability triple of an ingested prediction.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(
        "Macro-F1 refused: gold labels contain only {label}; Macro-F1 is not informative on a one-class subset \
         (report NEI recall and false SUPPORT/REFUTE rates instead)"
    )]
    MacroF1Refused { label: String },
    #[error("prediction coverage {coverage:.3} < 1.000 ({missing} missing, {duplicated} duplicated ids)")]
    IncompleteCoverage { coverage: f64, missing: usize, duplicated: usize },
    #[error("one-class metrics need an all-NEI gold subset; {example_id} is {label}")]
    NotOneClass { example_id: String, label: String },
    #[error("prediction line {line}: {detail}")]
    BadPrediction { line: usize, detail: String },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("drop summary for {train} is missing the {column} column")]
    MissingColumn { train: ConstructionFamily, column: ConstructionFamily },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
