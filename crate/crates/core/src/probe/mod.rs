//! Shallow trainable baselines and the construction-matrix runner.
//!
//! The trainer here is also the classifier behind the audit's separability
//! probe.

mod features;
mod logreg;
mod matrix;
mod sparse;

pub use features::{FeatureConfig, FeatureSpace, FeatureSpec, Vocabulary};
pub use logreg::{example_weights, softmax, train_softmax, SoftmaxRegression, TrainConfig};
pub use matrix::{check_variants, run_construction_matrix, CellSummary, MatrixCell, MatrixConfig, MatrixRun, Variant};
pub use sparse::SparseVector;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::manifest::{ConstructionFamily, Label, ManifestRecord};
use crate::metrics::{MetricsError, PredictionRecord};

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("unknown feature spec {0:?} (expected tfidf_claim_evidence, tfidf_evidence_only or length_overlap)")]
    UnknownSpec(String),
    #[error("missing-label: training data has {present} distinct label(s); at least 2 are needed")]
    MissingLabel { present: usize },
    #[error("loss became non-finite at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },
    #[error("feature dimension {found} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("variant {family}: SUPPORT/REFUTE portion differs from {reference} ({detail})")]
    VariantMismatch { family: ConstructionFamily, reference: ConstructionFamily, detail: String },
    #[error("group {group_id} appears in both training and evaluation data")]
    GroupOverlap { group_id: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// A three-label linear model with the featurizer it was trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub space: FeatureSpace,
    pub model: SoftmaxRegression,
    pub trained_on: ConstructionFamily,
    pub seed: u64,
}

impl LinearModel {
    /// Fits the featurizer and trainer on `train` alone.
    pub fn train(
        spec: FeatureSpec,
        train: &[ManifestRecord],
        trained_on: ConstructionFamily,
        features: FeatureConfig,
        cfg: &TrainConfig,
    ) -> Result<Self, ProbeError> {
        let space = FeatureSpace::fit(spec, train, features);
        let xs: Vec<SparseVector> = train.iter().map(|r| space.featurize_record(r)).collect();
        let ys: Vec<usize> = train.iter().map(|r| r.label.index()).collect();
        let (model, _) = train_softmax(&xs, &ys, Label::ALL.len(), cfg)?;
        Ok(LinearModel { space, model, trained_on, seed: cfg.seed })
    }

    pub fn model_id(&self) -> String {
        format!("{}-{}-s{}", self.space.spec, self.trained_on, self.seed)
    }

    pub fn predict_proba(&self, x: &SparseVector) -> Result<[f64; 3], ProbeError> {
        let p = self.model.predict_proba(x)?;
        Ok([p[0], p[1], p[2]])
    }

    pub fn predict(&self, records: &[ManifestRecord]) -> Result<Vec<PredictionRecord>, ProbeError> {
        let id = self.model_id();
        records
            .iter()
            .map(|r| {
                let p = self.predict_proba(&self.space.featurize_record(r))?;
                Ok(PredictionRecord::from_probs(&r.example_id, &id, self.seed, p))
            })
            .collect()
    }
}
