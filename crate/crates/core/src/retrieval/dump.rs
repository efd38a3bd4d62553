//! Plain-text index dump used for test fixtures.
//!
//! ```text
//! bm25	<k1>	<b>
//! doc	<doc_id>	<length>
//! post	<term>	<doc_id>	<tf>
//! ```
//!
//! Fields are tab-separated; lines appear in sorted order, so a dump of an
//! unchanged index is byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Bm25Index, Bm25Params, RetrievalError};

pub fn dump_index(index: &Bm25Index) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "bm25\t{}\t{}", index.params.k1, index.params.b);
    for (doc, len) in &index.doc_lengths {
        let _ = writeln!(out, "doc\t{doc}\t{len}");
    }
    for (term, docs) in &index.postings {
        for (doc, tf) in docs {
            let _ = writeln!(out, "post\t{term}\t{doc}\t{tf}");
        }
    }
    out
}

pub fn load_index(text: &str) -> Result<Bm25Index, RetrievalError> {
    let mut params = None;
    let mut lengths = BTreeMap::new();
    let mut postings: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let bad = |detail: &str| RetrievalError::Dump { line: i + 1, detail: detail.to_string() };
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            ["bm25", k1, b] => {
                let k1 = k1.parse().map_err(|_| bad("bad k1"))?;
                let b = b.parse().map_err(|_| bad("bad b"))?;
                params = Some(Bm25Params { k1, b });
            }
            ["doc", id, len] => {
                lengths.insert(id.to_string(), len.parse().map_err(|_| bad("bad length"))?);
            }
            ["post", term, doc, tf] => {
                let tf: usize = tf.parse().map_err(|_| bad("bad tf"))?;
                if tf == 0 {
                    return Err(bad("tf must be >= 1"));
                }
                if !lengths.contains_key(*doc) {
                    return Err(bad("posting for undeclared doc"));
                }
                postings.entry(term.to_string()).or_default().insert(doc.to_string(), tf);
            }
            _ => return Err(bad("unrecognized record")),
        }
    }
    let params = params.ok_or(RetrievalError::Dump { line: 0, detail: "missing bm25 header".into() })?;
    Bm25Index::from_parts(lengths, postings, params)
}
