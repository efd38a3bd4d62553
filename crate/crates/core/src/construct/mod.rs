//! NEI construction families.
//!
//! Generators only ever emit NEI records; the SUPPORT/REFUTE reference
//! portion of a variant comes from [`reference_examples`] unchanged. Each
//! claim draws from its own random stream keyed by `(rng_seed, claim_id)`,
//! so output is independent of processing order.

mod families;
mod fixed_claim;
mod missing_hop;

pub use families::{
    make_bm25_near_miss, make_cited_non_rationale, make_placeholder, make_position_biased, make_random_irrelevant,
    make_same_document,
};
pub use fixed_claim::{make_fixed_claim_pairs, FixedClaimPair, FixedClaimPairs, Unpaired};
pub use missing_hop::{make_missing_hop, parse_multihop, Fact, MultiHopExample};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::Lexicons;
use crate::manifest::{ClaimEntry, ConstructionFamily, Corpus, EvidenceUnit, Label, ManifestRecord, Split};
use crate::retrieval::{Bm25Index, Bm25Params, RetrievalError};

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("claim {claim_id}: no eligible irrelevant document after {attempts} attempts")]
    NoIrrelevantDocument { claim_id: String, attempts: usize },
    #[error("claim {claim_id}: every cited sentence is rationale")]
    AllRationale { claim_id: String },
    #[error("claim {claim_id}: no retrieved candidate reaches the overlap floor (best overlap {best_overlap})")]
    NoNearMiss { claim_id: String, best_overlap: usize },
    #[error("record {example_id} has no evidence document")]
    MissingDocument { example_id: String },
    #[error("hard record {example_id} is {status}, not valid_nei")]
    NotAdjudicated { example_id: String, status: String },
    #[error("multi-hop example {example_id} has {n} required fact(s); at least 2 are needed")]
    TooFewFacts { example_id: String, n: usize },
    #[error("multi-hop line {line}: {detail}")]
    MultiHopFormat { line: usize, detail: String },
    #[error("family {0} is not built from a corpus alone")]
    UnsupportedFamily(ConstructionFamily),
    #[error("invalid construction config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
}

/// Rule for choosing the position-biased sentence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionRule {
    /// The first sentence of the cited document that is not rationale.
    #[default]
    FirstNonRationale,
    /// The last such sentence.
    LastNonRationale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructionConfig {
    pub family: Option<ConstructionFamily>,
    pub rng_seed: u64,
    pub placeholder_marker: String,
    pub max_irrelevant_jaccard: f64,
    pub min_nearmiss_overlap: usize,
    pub position_rule: PositionRule,
    pub k_retrieval: usize,
    /// Longest cited non-rationale block, in sentences.
    pub max_block: usize,
    pub max_attempts: usize,
    pub source_data: String,
    pub bm25: Bm25Params,
    pub lexicons: Lexicons,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig {
            family: None,
            rng_seed: 13,
            placeholder_marker: crate::audit::DEFAULT_PLACEHOLDER_MARKER.to_string(),
            max_irrelevant_jaccard: 0.05,
            min_nearmiss_overlap: 2,
            position_rule: PositionRule::FirstNonRationale,
            k_retrieval: 10,
            max_block: 3,
            max_attempts: 1000,
            source_data: "corpus".to_string(),
            bm25: Bm25Params::default(),
            lexicons: Lexicons::default(),
        }
    }
}

impl ConstructionConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConstructError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConstructError::InvalidConfig(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), ConstructError> {
        let bad = |m: String| Err(ConstructError::InvalidConfig(m));
        if !(0.0..=1.0).contains(&self.max_irrelevant_jaccard) {
            return bad(format!("max_irrelevant_jaccard {} is outside [0, 1]", self.max_irrelevant_jaccard));
        }
        if self.k_retrieval < 1 {
            return bad("k_retrieval must be at least 1".into());
        }
        if self.max_block < 1 {
            return bad("max_block must be at least 1".into());
        }
        if self.max_attempts < 1 {
            return bad("max_attempts must be at least 1".into());
        }
        Ok(())
    }
}

pub(crate) fn example_id(claim_id: &str, family: ConstructionFamily) -> String {
    format!("{claim_id}:{family}")
}

pub(crate) fn nei_record(
    claim: &ClaimEntry,
    family: ConstructionFamily,
    evidence: Vec<EvidenceUnit>,
    cfg: &ConstructionConfig,
) -> ManifestRecord {
    let mut r = ManifestRecord::new(
        example_id(&claim.claim_id, family),
        &claim.claim_id,
        &claim.claim,
        evidence,
        Label::Nei,
        family,
    );
    r.group_id = claim.group().to_string();
    r.split = claim.split.unwrap_or(Split::Train);
    r.source_data = cfg.source_data.clone();
    let docs: Vec<String> = r.evidence.iter().filter_map(|u| u.doc_id.clone()).collect();
    if !docs.is_empty() {
        r.document_id = Some(docs);
        let ids: Vec<u32> = r.evidence.iter().flat_map(|u| u.sentence_ids.iter().flatten().copied()).collect();
        r.sentence_ids = Some(ids);
    }
    r
}

/// A unit covering the given sentences of one document.
pub(crate) fn unit(corpus: &Corpus, doc_id: &str, ids: Vec<u32>) -> EvidenceUnit {
    let text = corpus.documents[doc_id].text_of(&ids);
    EvidenceUnit { doc_id: Some(doc_id.to_string()), sentence_ids: Some(ids), text }
}

/// SUPPORT/REFUTE records carrying the full text of each cited document
/// that holds rationale for the claim (every cited document when none do).
pub fn reference_examples(corpus: &Corpus, cfg: &ConstructionConfig) -> Vec<ManifestRecord> {
    corpus
        .claims
        .values()
        .filter(|c| c.label != Label::Nei)
        .map(|c| {
            let with_rationale: Vec<&String> =
                c.cited_doc_ids.iter().filter(|d| c.rationale_in(d).is_some_and(|s| !s.is_empty())).collect();
            let docs = if with_rationale.is_empty() { c.cited_doc_ids.iter().collect() } else { with_rationale };
            let evidence = docs
                .into_iter()
                .map(|d| unit(corpus, d, (0..corpus.documents[d].sentences.len() as u32).collect()))
                .collect();
            let mut r = nei_record(c, ConstructionFamily::Reference, evidence, cfg);
            r.label = c.label;
            r
        })
        .collect()
}

/// One family's NEI records for the given claim slots. `same_document`
/// always draws from the documents of the SUPPORT/REFUTE claims.
pub fn construct_nei(
    corpus: &Corpus,
    slots: &[&ClaimEntry],
    family: ConstructionFamily,
    cfg: &ConstructionConfig,
) -> Result<Vec<ManifestRecord>, ConstructError> {
    cfg.check()?;
    match family {
        ConstructionFamily::Placeholder => Ok(make_placeholder(slots, cfg)),
        ConstructionFamily::RandomIrrelevant => make_random_irrelevant(slots, corpus, cfg),
        ConstructionFamily::PositionBiased => make_position_biased(slots, corpus, cfg),
        ConstructionFamily::Bm25NearMiss => {
            let index = Bm25Index::build(corpus, cfg.bm25)?;
            make_bm25_near_miss(slots, corpus, &index, cfg)
        }
        ConstructionFamily::CitedNonRationale => make_cited_non_rationale(slots, corpus, cfg),
        ConstructionFamily::SameDocument => make_same_document(&reference_examples(corpus, cfg), corpus, cfg),
        other => Err(ConstructError::UnsupportedFamily(other)),
    }
}

/// The reference portion plus one family's NEI records.
pub fn construct_variant(
    corpus: &Corpus,
    family: ConstructionFamily,
    cfg: &ConstructionConfig,
) -> Result<Vec<ManifestRecord>, ConstructError> {
    let nei = construct_nei(corpus, &corpus.nei_slots(), family, cfg)?;
    let mut out = reference_examples(corpus, cfg);
    out.extend(nei);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let cfg = ConstructionConfig::from_toml("rng_seed = 17\nk_retrieval = 5\n").unwrap();
        assert_eq!(cfg.rng_seed, 17);
        assert_eq!(cfg.placeholder_marker, "NO EVIDENCE");
        assert_eq!(cfg.max_irrelevant_jaccard, 0.05);
        assert_eq!(cfg.min_nearmiss_overlap, 2);
        assert!(ConstructionConfig::from_toml("max_irrelevant_jaccard = 1.5").is_err());
        assert!(ConstructionConfig::from_toml("k_retrieval = 0").is_err());
        assert!(ConstructionConfig::from_toml("unknown_knob = 1").is_err());
    }
}
