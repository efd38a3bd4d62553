use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{tokenize, RetrievalError};
use crate::manifest::Corpus;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

/// Inverted index: term → (doc_id → term frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct Bm25Index {
    pub(crate) doc_lengths: BTreeMap<String, usize>,
    pub(crate) postings: BTreeMap<String, BTreeMap<String, usize>>,
    pub(crate) avg_doc_len: f64,
    pub(crate) params: Bm25Params,
}

impl Bm25Index {
    /// Indexes every document of the corpus (title excluded, sentences joined).
    pub fn build(corpus: &Corpus, params: Bm25Params) -> Result<Self, RetrievalError> {
        Self::from_texts(corpus.documents.values().map(|d| (d.doc_id.as_str(), d.full_text())), params)
    }

    pub fn from_texts<'a, S: AsRef<str>>(
        docs: impl IntoIterator<Item = (&'a str, S)>,
        params: Bm25Params,
    ) -> Result<Self, RetrievalError> {
        let mut doc_lengths = BTreeMap::new();
        let mut postings: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        for (doc_id, text) in docs {
            let tokens = tokenize(text.as_ref());
            doc_lengths.insert(doc_id.to_string(), tokens.len());
            for t in tokens {
                *postings.entry(t).or_default().entry(doc_id.to_string()).or_default() += 1;
            }
        }
        Self::from_parts(doc_lengths, postings, params)
    }

    pub(crate) fn from_parts(
        doc_lengths: BTreeMap<String, usize>,
        postings: BTreeMap<String, BTreeMap<String, usize>>,
        params: Bm25Params,
    ) -> Result<Self, RetrievalError> {
        if doc_lengths.is_empty() {
            return Err(RetrievalError::EmptyCorpus);
        }
        let total: usize = doc_lengths.values().sum();
        let avg_doc_len = total as f64 / doc_lengths.len() as f64;
        Ok(Bm25Index { doc_lengths, postings, avg_doc_len, params })
    }

    pub fn doc_count(&self) -> usize {
        self.doc_lengths.len()
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn doc_len(&self, doc_id: &str) -> Option<usize> {
        self.doc_lengths.get(doc_id).copied()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.doc_lengths.keys().map(String::as_str)
    }

    pub fn term_frequency(&self, term: &str, doc_id: &str) -> usize {
        self.postings.get(term).and_then(|p| p.get(doc_id)).copied().unwrap_or(0)
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, BTreeMap::len)
    }

    /// ln(1 + (N − df + 0.5) / (df + 0.5)); always positive.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.doc_count() as f64;
        let df = self.document_frequency(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Okapi BM25 score of one document. Each occurrence of a term in the
    /// query contributes once; terms absent from the document add nothing.
    pub fn score(&self, query: &[String], doc_id: &str) -> Result<f64, RetrievalError> {
        let len = *self
            .doc_lengths
            .get(doc_id)
            .ok_or_else(|| RetrievalError::UnknownDocument(doc_id.to_string()))? as f64;
        let Bm25Params { k1, b } = self.params;
        let norm = k1 * (1.0 - b + b * len / self.avg_doc_len);
        let mut score = 0.0;
        for term in query {
            let tf = self.term_frequency(term, doc_id) as f64;
            if tf == 0.0 {
                continue;
            }
            score += self.idf(term) * tf * (k1 + 1.0) / (tf + norm);
        }
        Ok(score)
    }

    /// Top `k` documents by score, ties broken by ascending doc id.
    pub fn retrieve_top_k(&self, query: &[String], k: usize, exclude: &BTreeSet<String>) -> Vec<(String, f64)> {
        let mut scored: Vec<(String, f64)> = self
            .doc_lengths
            .keys()
            .filter(|d| !exclude.contains(*d))
            .map(|d| (d.clone(), self.score(query, d).expect("doc id comes from the index")))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(k);
        scored
    }
}
