use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ProbeError, SparseVector};
use crate::audit::{shallow_features_parts, Lexicons, FEATURE_NAMES};
use crate::manifest::{EvidenceUnit, ManifestRecord};
use crate::retrieval::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSpec {
    TfidfClaimEvidence,
    TfidfEvidenceOnly,
    LengthOverlap,
}

impl FeatureSpec {
    pub const ALL: [FeatureSpec; 3] =
        [FeatureSpec::TfidfClaimEvidence, FeatureSpec::TfidfEvidenceOnly, FeatureSpec::LengthOverlap];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSpec::TfidfClaimEvidence => "tfidf_claim_evidence",
            FeatureSpec::TfidfEvidenceOnly => "tfidf_evidence_only",
            FeatureSpec::LengthOverlap => "length_overlap",
        }
    }
}

impl fmt::Display for FeatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSpec {
    type Err = ProbeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|f| f.as_str() == s).ok_or_else(|| ProbeError::UnknownSpec(s.to_string()))
    }
}

/// Term → (column, document frequency), fitted on training texts only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub terms: BTreeMap<String, (u32, usize)>,
    pub n_docs: usize,
}

impl Vocabulary {
    /// Keeps terms whose document frequency is at least `min_df`; columns
    /// follow term order.
    pub fn fit<'a>(texts: impl IntoIterator<Item = &'a str>, min_df: usize) -> Self {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut n_docs = 0;
        for t in texts {
            n_docs += 1;
            for term in tokenize(t).into_iter().collect::<BTreeSet<_>>() {
                *df.entry(term).or_default() += 1;
            }
        }
        let terms = df
            .into_iter()
            .filter(|(_, d)| *d >= min_df)
            .enumerate()
            .map(|(i, (t, d))| (t, (i as u32, d)))
            .collect();
        Vocabulary { terms, n_docs }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `tf · ln(1 + N/df)` for each in-vocabulary term, shifted by `offset`.
    pub fn tfidf(&self, text: &str, offset: u32) -> Vec<(u32, f64)> {
        let mut tf: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
        for term in tokenize(text) {
            if let Some(&(col, df)) = self.terms.get(&term) {
                tf.entry(col).or_insert((0, df)).0 += 1;
            }
        }
        tf.into_iter()
            .map(|(col, (count, df))| (col + offset, count as f64 * (1.0 + self.n_docs as f64 / df as f64).ln()))
            .collect()
    }
}

fn l2_normalize(block: &mut [(u32, f64)]) {
    let norm = block.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, v) in block {
            *v /= norm;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub min_df: usize,
    /// Scale each TF-IDF block to unit length.
    pub normalize: bool,
    pub lexicons: Lexicons,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { min_df: 2, normalize: true, lexicons: Lexicons::default() }
    }
}

/// A fitted featurizer: vocabularies or standardization statistics come from
/// the training records passed to [`FeatureSpace::fit`] and nothing else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub spec: FeatureSpec,
    pub config: FeatureConfig,
    pub claim_vocab: Vocabulary,
    pub evidence_vocab: Vocabulary,
    /// Per-column mean and standard deviation for `length_overlap`.
    pub scaling: Vec<(f64, f64)>,
}

fn evidence_of(units: &[EvidenceUnit]) -> String {
    units.iter().map(|u| u.text.as_str()).filter(|t| !t.is_empty()).collect::<Vec<_>>().join(" ")
}

impl FeatureSpace {
    pub fn fit(spec: FeatureSpec, train: &[ManifestRecord], config: FeatureConfig) -> Self {
        let mut space = FeatureSpace {
            spec,
            claim_vocab: Vocabulary::default(),
            evidence_vocab: Vocabulary::default(),
            scaling: Vec::new(),
            config,
        };
        match spec {
            FeatureSpec::TfidfClaimEvidence | FeatureSpec::TfidfEvidenceOnly => {
                if spec == FeatureSpec::TfidfClaimEvidence {
                    space.claim_vocab = Vocabulary::fit(train.iter().map(|r| r.claim.as_str()), space.config.min_df);
                }
                let ev: Vec<String> = train.iter().map(|r| r.evidence_text()).collect();
                space.evidence_vocab = Vocabulary::fit(ev.iter().map(String::as_str), space.config.min_df);
            }
            FeatureSpec::LengthOverlap => {
                let rows: Vec<Vec<f64>> = train.iter().map(|r| space.shallow_row(&r.claim, &r.evidence)).collect();
                space.scaling = (0..FEATURE_NAMES.len())
                    .map(|c| {
                        let n = rows.len().max(1) as f64;
                        let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n;
                        let var = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
                        (mean, if var > 0.0 { var.sqrt() } else { 1.0 })
                    })
                    .collect();
            }
        }
        space
    }

    fn shallow_row(&self, claim: &str, evidence: &[EvidenceUnit]) -> Vec<f64> {
        shallow_features_parts(claim, evidence, None, &self.config.lexicons).to_dense()
    }

    pub fn dim(&self) -> usize {
        match self.spec {
            FeatureSpec::LengthOverlap => FEATURE_NAMES.len(),
            _ => self.claim_vocab.len() + self.evidence_vocab.len(),
        }
    }

    pub fn featurize(&self, claim: &str, evidence: &[EvidenceUnit]) -> SparseVector {
        let entries = match self.spec {
            FeatureSpec::LengthOverlap => self
                .shallow_row(claim, evidence)
                .iter()
                .zip(&self.scaling)
                .enumerate()
                .map(|(i, (v, (m, s)))| (i as u32, (v - m) / s))
                .collect(),
            FeatureSpec::TfidfClaimEvidence | FeatureSpec::TfidfEvidenceOnly => {
                let mut claim_block = if self.spec == FeatureSpec::TfidfClaimEvidence {
                    self.claim_vocab.tfidf(claim, 0)
                } else {
                    Vec::new()
                };
                let mut ev_block = self.evidence_vocab.tfidf(&evidence_of(evidence), self.claim_vocab.len() as u32);
                if self.config.normalize {
                    l2_normalize(&mut claim_block);
                    l2_normalize(&mut ev_block);
                }
                claim_block.extend(ev_block);
                claim_block
            }
        };
        SparseVector::new(self.dim(), entries).expect("featurizer emits sorted finite entries")
    }

    pub fn featurize_record(&self, record: &ManifestRecord) -> SparseVector {
        self.featurize(&record.claim, &record.evidence)
    }
}
