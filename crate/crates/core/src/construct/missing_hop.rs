use std::io::BufRead;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{example_id, ConstructError, ConstructionConfig};
use crate::manifest::{ConstructionFamily, EvidenceUnit, Label, ManifestRecord, ValidationStatus};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fact {
    pub fact_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_id: Option<String>,
    pub text: String,
}

/// A multi-hop claim; which facts are required is part of the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiHopExample {
    pub claim_id: String,
    pub claim: String,
    #[serde(default)]
    pub group_id: Option<String>,
    pub required: Vec<Fact>,
    #[serde(default)]
    pub optional: Vec<Fact>,
}

pub fn parse_multihop<R: BufRead>(reader: R) -> Result<Vec<MultiHopExample>, ConstructError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| ConstructError::MultiHopFormat { line: i + 1, detail: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| ConstructError::MultiHopFormat { line: i + 1, detail: e.to_string() })?,
        );
    }
    Ok(out)
}

/// Drops one required fact per example. Outputs are candidates only: they
/// are never marked as validated.
pub fn make_missing_hop(
    examples: &[MultiHopExample],
    cfg: &ConstructionConfig,
) -> Result<Vec<ManifestRecord>, ConstructError> {
    examples
        .iter()
        .map(|ex| {
            if ex.required.len() < 2 {
                return Err(ConstructError::TooFewFacts { example_id: ex.claim_id.clone(), n: ex.required.len() });
            }
            let drop = rng::stream(cfg.rng_seed, &ex.claim_id).random_range(0..ex.required.len());
            let evidence: Vec<EvidenceUnit> = ex
                .required
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, f)| f)
                .chain(&ex.optional)
                .map(|f| EvidenceUnit { doc_id: f.doc_id.clone(), sentence_ids: None, text: f.text.clone() })
                .collect();
            let mut r = ManifestRecord::new(
                example_id(&ex.claim_id, ConstructionFamily::MissingHop),
                &ex.claim_id,
                &ex.claim,
                evidence,
                Label::Nei,
                ConstructionFamily::MissingHop,
            );
            if let Some(g) = &ex.group_id {
                r.group_id = g.clone();
            }
            r.source_data = cfg.source_data.clone();
            r.validation_status = ValidationStatus::Candidate;
            r.extra.insert("removed_fact_id".into(), serde_json::Value::String(ex.required[drop].fact_id.clone()));
            Ok(r)
        })
        .collect()
}
