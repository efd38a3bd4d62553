use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;

use super::{nei_record, unit, ConstructError, ConstructionConfig, PositionRule};
use crate::audit::overlap_stats;
use crate::manifest::{ClaimEntry, ConstructionFamily, Corpus, EvidenceUnit, ManifestRecord};
use crate::retrieval::{tokenize, Bm25Index};
use crate::rng;

/// The configured marker as the sole evidence unit.
pub fn make_placeholder(claims: &[&ClaimEntry], cfg: &ConstructionConfig) -> Vec<ManifestRecord> {
    claims
        .iter()
        .map(|c| {
            nei_record(c, ConstructionFamily::Placeholder, vec![EvidenceUnit::text(&cfg.placeholder_marker)], cfg)
        })
        .collect()
}

/// A whole document cited by no claim of the same group, with low lexical
/// overlap, drawn by rejection sampling.
pub fn make_random_irrelevant(
    claims: &[&ClaimEntry],
    corpus: &Corpus,
    cfg: &ConstructionConfig,
) -> Result<Vec<ManifestRecord>, ConstructError> {
    let mut cited_by_group: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for c in corpus.claims.values() {
        cited_by_group.entry(c.group()).or_default().extend(c.cited_doc_ids.iter().map(String::as_str));
    }
    let empty = BTreeSet::new();
    claims
        .iter()
        .map(|c| {
            let own = cited_by_group.get(c.group()).unwrap_or(&empty);
            let eligible: Vec<&str> = corpus
                .documents
                .keys()
                .map(String::as_str)
                .filter(|d| !own.contains(d) && !c.cited_doc_ids.iter().any(|x| x == d))
                .collect();
            let fail = || ConstructError::NoIrrelevantDocument { claim_id: c.claim_id.clone(), attempts: cfg.max_attempts };
            if eligible.is_empty() {
                return Err(fail());
            }
            let mut r = rng::stream(cfg.rng_seed, &c.claim_id);
            for _ in 0..cfg.max_attempts {
                let doc = &corpus.documents[eligible[r.random_range(0..eligible.len())]];
                let (_, jaccard, _) = overlap_stats(&c.claim, &doc.full_text(), &cfg.lexicons);
                if jaccard <= cfg.max_irrelevant_jaccard {
                    let ids = (0..doc.sentences.len() as u32).collect();
                    let u = unit(corpus, &doc.doc_id, ids);
                    return Ok(nei_record(c, ConstructionFamily::RandomIrrelevant, vec![u], cfg));
                }
            }
            Err(fail())
        })
        .collect()
}

fn non_rationale(c: &ClaimEntry, corpus: &Corpus, doc_id: &str) -> Vec<u32> {
    (0..corpus.documents[doc_id].sentences.len() as u32).filter(|&i| !c.is_rationale(doc_id, i)).collect()
}

/// One non-rationale sentence at a fixed position of the first cited
/// document that has one.
pub fn make_position_biased(
    claims: &[&ClaimEntry],
    corpus: &Corpus,
    cfg: &ConstructionConfig,
) -> Result<Vec<ManifestRecord>, ConstructError> {
    claims
        .iter()
        .map(|c| {
            for d in &c.cited_doc_ids {
                let free = non_rationale(c, corpus, d);
                let pick = match cfg.position_rule {
                    PositionRule::FirstNonRationale => free.first(),
                    PositionRule::LastNonRationale => free.last(),
                };
                if let Some(&i) = pick {
                    let mut r = nei_record(c, ConstructionFamily::PositionBiased, vec![unit(corpus, d, vec![i])], cfg);
                    r.sentence_position = Some(vec![i]);
                    return Ok(r);
                }
            }
            Err(ConstructError::AllRationale { claim_id: c.claim_id.clone() })
        })
        .collect()
}

/// The highest-ranked BM25 document whose text, after removing the claim's
/// rationale sentences, still shares enough content types with the claim.
/// The claim's own cited documents are allowed.
pub fn make_bm25_near_miss(
    claims: &[&ClaimEntry],
    corpus: &Corpus,
    index: &Bm25Index,
    cfg: &ConstructionConfig,
) -> Result<Vec<ManifestRecord>, ConstructError> {
    let none = BTreeSet::new();
    claims
        .iter()
        .map(|c| {
            let ranked = index.retrieve_top_k(&tokenize(&c.claim), cfg.k_retrieval, &none);
            let mut best_overlap = 0;
            for (rank, (doc_id, score)) in ranked.iter().enumerate() {
                let free = non_rationale(c, corpus, doc_id);
                if free.is_empty() {
                    continue;
                }
                let u = unit(corpus, doc_id, free.clone());
                let (overlap, _, _) = overlap_stats(&c.claim, &u.text, &cfg.lexicons);
                best_overlap = best_overlap.max(overlap);
                if overlap >= cfg.min_nearmiss_overlap {
                    let mut r = nei_record(c, ConstructionFamily::Bm25NearMiss, vec![u], cfg);
                    r.retrieval_method = Some("bm25".into());
                    r.retrieval_rank = Some(rank as u32 + 1);
                    r.bm25_score = Some(*score);
                    r.sentence_position = Some(free);
                    return Ok(r);
                }
            }
            Err(ConstructError::NoNearMiss { claim_id: c.claim_id.clone(), best_overlap })
        })
        .collect()
}

/// A contiguous block of 1 to `max_block` non-rationale sentences from a
/// cited document. The block length is drawn uniformly among lengths that
/// fit somewhere, then the block uniformly among those of that length.
pub fn make_cited_non_rationale(
    claims: &[&ClaimEntry],
    corpus: &Corpus,
    cfg: &ConstructionConfig,
) -> Result<Vec<ManifestRecord>, ConstructError> {
    claims
        .iter()
        .map(|c| {
            // length → (doc, start)
            let mut blocks: BTreeMap<usize, Vec<(&str, u32)>> = BTreeMap::new();
            for d in &c.cited_doc_ids {
                let n = corpus.documents[d].sentences.len() as u32;
                for start in 0..n {
                    for len in 1..=cfg.max_block as u32 {
                        if start + len > n || (start..start + len).any(|i| c.is_rationale(d, i)) {
                            break;
                        }
                        blocks.entry(len as usize).or_default().push((d, start));
                    }
                }
            }
            if blocks.is_empty() {
                return Err(ConstructError::AllRationale { claim_id: c.claim_id.clone() });
            }
            let mut r = rng::stream(cfg.rng_seed, &c.claim_id);
            let lengths: Vec<usize> = blocks.keys().copied().collect();
            let len = lengths[r.random_range(0..lengths.len())];
            let options = &blocks[&len];
            let (doc, start) = options[r.random_range(0..options.len())];
            let ids: Vec<u32> = (start..start + len as u32).collect();
            let mut rec = nei_record(c, ConstructionFamily::CitedNonRationale, vec![unit(corpus, doc, ids.clone())], cfg);
            rec.sentence_position = Some(ids);
            Ok(rec)
        })
        .collect()
}

/// One non-rationale sentence from the document of each reference example.
pub fn make_same_document(
    reference: &[ManifestRecord],
    corpus: &Corpus,
    cfg: &ConstructionConfig,
) -> Result<Vec<ManifestRecord>, ConstructError> {
    reference
        .iter()
        .map(|rec| {
            let doc_id = rec
                .evidence
                .iter()
                .find_map(|u| u.doc_id.as_deref())
                .or_else(|| rec.document_id.as_ref().and_then(|d| d.first()).map(String::as_str))
                .filter(|d| corpus.documents.contains_key(*d))
                .ok_or_else(|| ConstructError::MissingDocument { example_id: rec.example_id.clone() })?;
            let claim = corpus.claims.get(&rec.claim_id);
            let n = corpus.documents[doc_id].sentences.len() as u32;
            let free: Vec<u32> = (0..n).filter(|&i| !claim.is_some_and(|c| c.is_rationale(doc_id, i))).collect();
            if free.is_empty() {
                return Err(ConstructError::AllRationale { claim_id: rec.claim_id.clone() });
            }
            let i = free[rng::stream(cfg.rng_seed, &rec.claim_id).random_range(0..free.len())];
            let entry = claim.cloned().unwrap_or_else(|| ClaimEntry {
                claim_id: rec.claim_id.clone(),
                claim: rec.claim.clone(),
                group_id: Some(rec.group_id.clone()),
                cited_doc_ids: vec![doc_id.to_string()],
                rationale: BTreeMap::new(),
                label: rec.label,
                split: Some(rec.split),
            });
            let mut out = nei_record(&entry, ConstructionFamily::SameDocument, vec![unit(corpus, doc_id, vec![i])], cfg);
            out.group_id = rec.group_id.clone();
            out.split = rec.split;
            out.sentence_position = Some(vec![i]);
            Ok(out)
        })
        .collect()
}
