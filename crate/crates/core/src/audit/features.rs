use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Lexicons;
use crate::manifest::{EvidenceUnit, ManifestRecord};
use crate::retrieval::tokenize;

/// Evidence-side surface features of one example.
///
/// Computed from the claim and evidence only; label and construction are
/// never read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShallowFeatureVector {
    pub n_tokens: usize,
    pub n_sentences: usize,
    pub overlap_count: usize,
    pub jaccard: f64,
    pub coverage: f64,
    pub placeholder_flag: bool,
    pub context_marker_rate: f64,
    pub method_marker_rate: f64,
    pub mean_sentence_position: Option<f64>,
    pub source_concentration: f64,
}

/// Column names of [`ShallowFeatureVector::to_dense`], in order.
pub const FEATURE_NAMES: [&str; 11] = [
    "n_tokens",
    "n_sentences",
    "overlap_count",
    "jaccard",
    "coverage",
    "placeholder_flag",
    "context_marker_rate",
    "method_marker_rate",
    "mean_sentence_position",
    "has_sentence_position",
    "source_concentration",
];

impl ShallowFeatureVector {
    /// Dense numeric form for probes; an absent position becomes 0 with the
    /// indicator column set to 0.
    pub fn to_dense(&self) -> Vec<f64> {
        vec![
            self.n_tokens as f64,
            self.n_sentences as f64,
            self.overlap_count as f64,
            self.jaccard,
            self.coverage,
            f64::from(u8::from(self.placeholder_flag)),
            self.context_marker_rate,
            self.method_marker_rate,
            self.mean_sentence_position.unwrap_or(0.0),
            f64::from(u8::from(self.mean_sentence_position.is_some())),
            self.source_concentration,
        ]
    }
}

/// Splits on `.`, `!` or `?` followed by whitespace.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    for (i, &c) in bytes.iter().enumerate() {
        if matches!(c, b'.' | b'!' | b'?') && bytes.get(i + 1).is_some_and(|n| n.is_ascii_whitespace()) {
            let s = text[start..=i].trim();
            if !s.is_empty() {
                out.push(s);
            }
            start = i + 1;
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

/// Overlap statistics between claim and evidence content types:
/// (overlap_count, jaccard, coverage).
pub fn overlap_stats(claim: &str, evidence: &str, lex: &Lexicons) -> (usize, f64, f64) {
    let c = lex.content_types(claim);
    let e = lex.content_types(evidence);
    let shared = c.intersection(&e).count();
    let union = c.len() + e.len() - shared;
    let jaccard = if union == 0 { 0.0 } else { shared as f64 / union as f64 };
    let coverage = if c.is_empty() { 0.0 } else { shared as f64 / c.len() as f64 };
    (shared, jaccard, coverage)
}

pub fn shallow_features(record: &ManifestRecord, lex: &Lexicons) -> ShallowFeatureVector {
    shallow_features_parts(&record.claim, &record.evidence, record.sentence_position.as_deref(), lex)
}

/// Features from a claim and evidence units that need not come from a record.
pub fn shallow_features_parts(
    claim: &str,
    units: &[EvidenceUnit],
    sentence_position: Option<&[u32]>,
    lex: &Lexicons,
) -> ShallowFeatureVector {
    let evidence = units.iter().map(|u| u.text.as_str()).filter(|t| !t.is_empty()).collect::<Vec<_>>().join(" ");
    let (overlap_count, jaccard, coverage) = overlap_stats(claim, &evidence, lex);

    let mut sentences: Vec<&str> = Vec::new();
    let mut n_sentences = 0;
    let mut per_source: BTreeMap<Option<&str>, usize> = BTreeMap::new();
    let mut positions: Vec<u32> = Vec::new();
    for unit in units {
        let segs = split_sentences(&unit.text);
        let count = match &unit.sentence_ids {
            Some(ids) if !ids.is_empty() => ids.len(),
            _ if unit.text.trim().is_empty() && units.len() == 1 => 1,
            _ => segs.len(),
        };
        n_sentences += count;
        *per_source.entry(unit.doc_id.as_deref()).or_default() += count;
        sentences.extend(segs);
        if let Some(ids) = &unit.sentence_ids {
            positions.extend(ids);
        }
    }
    if positions.is_empty() {
        if let Some(p) = sentence_position {
            positions.extend(p);
        }
    }

    let marker_rate = |markers: &std::collections::BTreeSet<String>| {
        if sentences.is_empty() {
            return 0.0;
        }
        let hits = sentences
            .iter()
            .filter(|s| tokenize(s).iter().any(|t| markers.contains(t)))
            .count();
        hits as f64 / sentences.len() as f64
    };

    let source_concentration = match per_source.values().max() {
        Some(&m) if n_sentences > 0 => m as f64 / n_sentences as f64,
        _ => 1.0,
    };

    ShallowFeatureVector {
        n_tokens: tokenize(&evidence).len(),
        n_sentences,
        overlap_count,
        jaccard,
        coverage,
        placeholder_flag: lex.is_placeholder(&evidence),
        context_marker_rate: marker_rate(&lex.context_markers),
        method_marker_rate: marker_rate(&lex.method_markers),
        mean_sentence_position: (!positions.is_empty())
            .then(|| positions.iter().map(|&p| p as f64).sum::<f64>() / positions.len() as f64),
        source_concentration,
    }
}
