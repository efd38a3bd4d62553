use std::collections::BTreeMap;

use serde::Serialize;

use super::ShallowFeatureVector;
use crate::manifest::{ConstructionFamily, ManifestRecord};

/// Mean shallow features of one construction family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub construction: ConstructionFamily,
    pub n: usize,
    pub avg_sentences: f64,
    pub avg_tokens: f64,
    pub coverage: f64,
    pub overlap: f64,
    pub jaccard: f64,
    pub placeholder_rate: f64,
    pub context_marker_rate: f64,
    pub method_marker_rate: f64,
    /// Mean over records that carry a position; absent when none do.
    pub mean_sentence_position: Option<f64>,
    pub source_concentration: f64,
}

impl FamilySummary {
    pub const CSV_HEADER: [&'static str; 12] = [
        "construction",
        "n",
        "avg_sentences",
        "avg_tokens",
        "coverage",
        "overlap",
        "jaccard",
        "placeholder_rate",
        "context_marker_rate",
        "method_marker_rate",
        "mean_sentence_position",
        "source_concentration",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.construction.to_string(),
            self.n.to_string(),
            format!("{:.2}", self.avg_sentences),
            format!("{:.2}", self.avg_tokens),
            format!("{:.3}", self.coverage),
            format!("{:.3}", self.overlap),
            format!("{:.3}", self.jaccard),
            format!("{:.3}", self.placeholder_rate),
            format!("{:.3}", self.context_marker_rate),
            format!("{:.3}", self.method_marker_rate),
            self.mean_sentence_position.map_or(String::new(), |p| format!("{p:.2}")),
            format!("{:.3}", self.source_concentration),
        ]
    }

    pub fn to_csv(rows: &[FamilySummary]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::CSV_HEADER).expect("in-memory write");
        for r in rows {
            w.write_record(r.csv_row()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is UTF-8")
    }
}

/// Per-family means. `features[i]` belongs to `records[i]`.
pub fn audit_summary(records: &[ManifestRecord], features: &[ShallowFeatureVector]) -> Vec<FamilySummary> {
    assert_eq!(records.len(), features.len(), "one feature vector per record");
    let mut by_family: BTreeMap<ConstructionFamily, Vec<&ShallowFeatureVector>> = BTreeMap::new();
    for (r, f) in records.iter().zip(features) {
        by_family.entry(r.construction).or_default().push(f);
    }
    by_family
        .into_iter()
        .map(|(construction, fs)| {
            let n = fs.len() as f64;
            let mean = |g: fn(&ShallowFeatureVector) -> f64| fs.iter().map(|f| g(f)).sum::<f64>() / n;
            let positions: Vec<f64> = fs.iter().filter_map(|f| f.mean_sentence_position).collect();
            FamilySummary {
                construction,
                n: fs.len(),
                avg_sentences: mean(|f| f.n_sentences as f64),
                avg_tokens: mean(|f| f.n_tokens as f64),
                coverage: mean(|f| f.coverage),
                overlap: mean(|f| f.overlap_count as f64),
                jaccard: mean(|f| f.jaccard),
                placeholder_rate: mean(|f| f64::from(u8::from(f.placeholder_flag))),
                context_marker_rate: mean(|f| f.context_marker_rate),
                method_marker_rate: mean(|f| f.method_marker_rate),
                mean_sentence_position: (!positions.is_empty())
                    .then(|| positions.iter().sum::<f64>() / positions.len() as f64),
                source_concentration: mean(|f| f.source_concentration),
            }
        })
        .collect()
}
