use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::record::{Label, ManifestRecord};
use crate::audit::{overlap_stats, Lexicons};
use crate::retrieval::tokenize;

/// One row per (variant, split).
///
/// Token averages are given both for claim plus evidence and for evidence
/// alone, since either reading of "average tokens" is common.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitStats {
    pub variant: String,
    pub split: String,
    pub n: usize,
    pub n_support: usize,
    pub n_refute: usize,
    pub n_nei: usize,
    pub avg_tokens_claim_evidence: f64,
    pub avg_tokens_evidence: f64,
    pub avg_coverage: f64,
    pub placeholder_rate: f64,
    pub duplicate_count: usize,
    pub missing_claim: usize,
    pub missing_evidence: usize,
}

impl SplitStats {
    pub const CSV_HEADER: [&'static str; 13] = [
        "variant",
        "split",
        "n",
        "n_support",
        "n_refute",
        "n_nei",
        "avg_tokens_claim_evidence",
        "avg_tokens_evidence",
        "avg_coverage",
        "placeholder_rate",
        "duplicate_count",
        "missing_claim",
        "missing_evidence",
    ];

    fn compute(variant: &str, split: &str, records: &[&ManifestRecord], lex: &Lexicons) -> Self {
        let n = records.len();
        let count = |l: Label| records.iter().filter(|r| r.label == l).count();
        let mut tok_all = 0usize;
        let mut tok_ev = 0usize;
        let mut cov = 0.0;
        let mut placeholders = 0;
        let mut ids = BTreeSet::new();
        let mut duplicate_count = 0;
        for r in records {
            let ev = r.evidence_text();
            let e = tokenize(&ev).len();
            tok_ev += e;
            tok_all += e + tokenize(&r.claim).len();
            cov += overlap_stats(&r.claim, &ev, lex).2;
            if lex.is_placeholder(&ev) {
                placeholders += 1;
            }
            if !ids.insert(r.example_id.as_str()) {
                duplicate_count += 1;
            }
        }
        let avg = |x: f64| if n == 0 { 0.0 } else { x / n as f64 };
        SplitStats {
            variant: variant.to_string(),
            split: split.to_string(),
            n,
            n_support: count(Label::Support),
            n_refute: count(Label::Refute),
            n_nei: count(Label::Nei),
            avg_tokens_claim_evidence: avg(tok_all as f64),
            avg_tokens_evidence: avg(tok_ev as f64),
            avg_coverage: avg(cov),
            placeholder_rate: avg(placeholders as f64),
            duplicate_count,
            missing_claim: records.iter().filter(|r| r.claim.trim().is_empty()).count(),
            missing_evidence: records.iter().filter(|r| r.evidence.is_empty()).count(),
        }
    }

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.variant.clone(),
            self.split.clone(),
            self.n.to_string(),
            self.n_support.to_string(),
            self.n_refute.to_string(),
            self.n_nei.to_string(),
            format!("{:.2}", self.avg_tokens_claim_evidence),
            format!("{:.2}", self.avg_tokens_evidence),
            format!("{:.3}", self.avg_coverage),
            format!("{:.3}", self.placeholder_rate),
            self.duplicate_count.to_string(),
            self.missing_claim.to_string(),
            self.missing_evidence.to_string(),
        ]
    }

    pub fn to_csv(rows: &[SplitStats]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::CSV_HEADER).expect("in-memory write");
        for r in rows {
            w.write_record(r.csv_row()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is UTF-8")
    }
}

/// Per-split statistics of one manifest variant. An empty manifest yields a
/// single all-zero row with split `all`.
pub fn split_statistics(variant: &str, records: &[ManifestRecord], lex: &Lexicons) -> Vec<SplitStats> {
    if records.is_empty() {
        return vec![SplitStats::compute(variant, "all", &[], lex)];
    }
    let mut by_split: BTreeMap<_, Vec<&ManifestRecord>> = BTreeMap::new();
    for r in records {
        by_split.entry(r.split).or_default().push(r);
    }
    by_split.into_iter().map(|(s, rs)| SplitStats::compute(variant, s.as_str(), &rs, lex)).collect()
}
