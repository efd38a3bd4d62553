//! Tokenization and an Okapi BM25 index over whole documents.

mod bm25;
mod dump;

pub use bm25::{Bm25Index, Bm25Params};
pub use dump::{dump_index, load_index};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("cannot build an index over an empty corpus")]
    EmptyCorpus,
    #[error("document {0:?} is not in the index")]
    UnknownDocument(String),
    #[error("malformed index dump at line {line}: {detail}")]
    Dump { line: usize, detail: String },
}

/// Lowercased alphanumeric runs. Anything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}
