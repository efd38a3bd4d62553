use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::record::{Label, Split};
use super::ManifestError;

/// A source document; sentences are 0-indexed in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub sentences: Vec<String>,
}

impl Document {
    pub fn text_of(&self, ids: &[u32]) -> String {
        ids.iter()
            .filter_map(|&i| self.sentences.get(i as usize))
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn full_text(&self) -> String {
        self.sentences.join(" ")
    }
}

/// A claim with its citations, rationale sentences and reference label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimEntry {
    pub claim_id: String,
    pub claim: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_id: Option<String>,
    #[serde(default)]
    pub cited_doc_ids: Vec<String>,
    /// doc_id → indices of rationale sentences for this claim.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub rationale: BTreeMap<String, BTreeSet<u32>>,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl ClaimEntry {
    pub fn group(&self) -> &str {
        self.group_id.as_deref().unwrap_or(&self.claim_id)
    }

    pub fn rationale_in(&self, doc_id: &str) -> Option<&BTreeSet<u32>> {
        self.rationale.get(doc_id)
    }

    pub fn is_rationale(&self, doc_id: &str, sentence: u32) -> bool {
        self.rationale.get(doc_id).is_some_and(|s| s.contains(&sentence))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub documents: BTreeMap<String, Document>,
    pub claims: BTreeMap<String, ClaimEntry>,
}

fn read_lines<T: for<'de> Deserialize<'de>>(
    reader: impl BufRead,
    what: &'static str,
) -> Result<Vec<T>, ManifestError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|source| ManifestError::Corpus {
            detail: format!("{what} line {}: {source}", idx + 1),
        })?;
        out.push(item);
    }
    Ok(out)
}

impl Corpus {
    /// Builds a corpus and checks its invariants.
    pub fn new(documents: Vec<Document>, claims: Vec<ClaimEntry>) -> Result<Self, ManifestError> {
        let mut corpus = Corpus::default();
        for doc in documents {
            if corpus.documents.contains_key(&doc.doc_id) {
                return Err(ManifestError::Corpus { detail: format!("duplicate doc_id {}", doc.doc_id) });
            }
            corpus.documents.insert(doc.doc_id.clone(), doc);
        }
        for claim in claims {
            if corpus.claims.contains_key(&claim.claim_id) {
                return Err(ManifestError::Corpus { detail: format!("duplicate claim_id {}", claim.claim_id) });
            }
            corpus.claims.insert(claim.claim_id.clone(), claim);
        }
        corpus.check()?;
        Ok(corpus)
    }

    fn check(&self) -> Result<(), ManifestError> {
        for doc in self.documents.values() {
            if doc.sentences.is_empty() {
                return Err(ManifestError::Corpus { detail: format!("document {} has no sentences", doc.doc_id) });
            }
        }
        for claim in self.claims.values() {
            for doc_id in &claim.cited_doc_ids {
                if !self.documents.contains_key(doc_id) {
                    return Err(ManifestError::Corpus {
                        detail: format!("claim {} cites unknown document {doc_id}", claim.claim_id),
                    });
                }
            }
            for (doc_id, ids) in &claim.rationale {
                let doc = self.documents.get(doc_id).ok_or_else(|| ManifestError::Corpus {
                    detail: format!("claim {} has rationale in unknown document {doc_id}", claim.claim_id),
                })?;
                if let Some(bad) = ids.iter().find(|&&i| i as usize >= doc.sentences.len()) {
                    return Err(ManifestError::Corpus {
                        detail: format!(
                            "claim {} rationale index {bad} out of range for {doc_id} ({} sentences)",
                            claim.claim_id,
                            doc.sentences.len()
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Loads `documents.jsonl` and `claims.jsonl` from a directory.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, ManifestError> {
        let dir = dir.as_ref();
        let open = |name: &str| -> Result<std::io::BufReader<std::fs::File>, ManifestError> {
            Ok(std::io::BufReader::new(std::fs::File::open(dir.join(name))?))
        };
        let documents = read_lines(open("documents.jsonl")?, "documents.jsonl")?;
        let claims = read_lines(open("claims.jsonl")?, "claims.jsonl")?;
        Corpus::new(documents, claims)
    }

    pub fn documents_jsonl(&self) -> String {
        self.documents
            .values()
            .map(|d| serde_json::to_string(d).expect("document serializes") + "\n")
            .collect()
    }

    pub fn claims_jsonl(&self) -> String {
        self.claims
            .values()
            .map(|c| serde_json::to_string(c).expect("claim serializes") + "\n")
            .collect()
    }

    /// Claims whose reference label is NEI, in claim_id order.
    pub fn nei_slots(&self) -> Vec<&ClaimEntry> {
        self.claims.values().filter(|c| c.label == Label::Nei).collect()
    }
}
