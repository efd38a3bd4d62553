use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::record::{ManifestRecord, Split};

/// A group found in more than one split of the same variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WithinVariantLeak {
    pub variant: String,
    pub group_id: String,
    pub splits: Vec<Split>,
}

/// A group whose split differs between variants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossVariantLeak {
    pub group_id: String,
    pub locations: Vec<(String, Split)>,
}

/// Documents shared by two splits of one variant. This is source metadata,
/// not leakage: one paper can be relevant to several claims.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DocumentOverlap {
    pub variant: String,
    pub split_a: Split,
    pub split_b: Split,
    pub shared_documents: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LeakageReport {
    pub within_variant: Vec<WithinVariantLeak>,
    pub cross_variant: Vec<CrossVariantLeak>,
    pub document_overlap: Vec<DocumentOverlap>,
}

impl LeakageReport {
    /// No claim-group leak of either kind. Document overlap does not count.
    pub fn is_clean(&self) -> bool {
        self.within_variant.is_empty() && self.cross_variant.is_empty()
    }

    /// CSV with header `kind,variant,group_id,locations,count`.
    ///
    /// `locations` joins `variant:split` (or `split` for within-variant rows)
    /// with `;`. `count` is the number of locations, or shared documents for
    /// `document_overlap` rows.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "variant", "group_id", "locations", "count"]).expect("in-memory write");
        for l in &self.within_variant {
            let locs = l.splits.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(";");
            w.write_record(["within_variant", &l.variant, &l.group_id, &locs, &l.splits.len().to_string()])
                .expect("in-memory write");
        }
        for l in &self.cross_variant {
            let locs = l.locations.iter().map(|(v, s)| format!("{v}:{s}")).collect::<Vec<_>>().join(";");
            w.write_record(["cross_variant", "", &l.group_id, &locs, &l.locations.len().to_string()])
                .expect("in-memory write");
        }
        for d in &self.document_overlap {
            let locs = format!("{};{}", d.split_a, d.split_b);
            w.write_record(["document_overlap", &d.variant, "", &locs, &d.shared_documents.to_string()])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is UTF-8")
    }
}

fn documents_of(r: &ManifestRecord) -> impl Iterator<Item = &str> {
    r.document_id
        .iter()
        .flatten()
        .map(String::as_str)
        .chain(r.evidence.iter().filter_map(|u| u.doc_id.as_deref()))
}

/// Claim-group leakage within and across manifest variants.
pub fn leakage_audit(manifests: &[(String, Vec<ManifestRecord>)]) -> LeakageReport {
    let mut report = LeakageReport::default();
    // group → variant → splits
    let mut seen: BTreeMap<&str, BTreeMap<&str, BTreeSet<Split>>> = BTreeMap::new();
    for (variant, records) in manifests {
        let mut docs: BTreeMap<Split, BTreeSet<&str>> = BTreeMap::new();
        for r in records {
            seen.entry(&r.group_id).or_default().entry(variant).or_default().insert(r.split);
            docs.entry(r.split).or_default().extend(documents_of(r));
        }
        let splits: Vec<Split> = docs.keys().copied().collect();
        for (i, &a) in splits.iter().enumerate() {
            for &b in &splits[i + 1..] {
                let shared = docs[&a].intersection(&docs[&b]).count();
                if shared > 0 {
                    report.document_overlap.push(DocumentOverlap {
                        variant: variant.clone(),
                        split_a: a,
                        split_b: b,
                        shared_documents: shared,
                    });
                }
            }
        }
    }
    for (group, by_variant) in &seen {
        for (variant, splits) in by_variant {
            if splits.len() > 1 {
                report.within_variant.push(WithinVariantLeak {
                    variant: variant.to_string(),
                    group_id: group.to_string(),
                    splits: splits.iter().copied().collect(),
                });
            }
        }
        let all: BTreeSet<Split> = by_variant.values().flatten().copied().collect();
        if by_variant.len() > 1 && all.len() > 1 {
            report.cross_variant.push(CrossVariantLeak {
                group_id: group.to_string(),
                locations: by_variant
                    .iter()
                    .flat_map(|(v, ss)| ss.iter().map(move |s| (v.to_string(), *s)))
                    .collect(),
            });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::{group_disjoint_split, ConstructionFamily, EvidenceUnit, Label, SplitRatios};
    use proptest::prelude::*;

    fn rec(id: &str, group: &str, split: Split, doc: &str) -> ManifestRecord {
        let mut r = ManifestRecord::new(
            id,
            group,
            "claim",
            vec![EvidenceUnit { doc_id: Some(doc.into()), sentence_ids: Some(vec![0]), text: "t".into() }],
            Label::Support,
            ConstructionFamily::Reference,
        );
        r.split = split;
        r
    }

    #[test]
    fn cross_variant_leak_lists_both_locations() {
        let a = vec![rec("a1", "g7", Split::Train, "d1")];
        let b = vec![rec("b1", "g7", Split::Test, "d1")];
        let rep = leakage_audit(&[("A".into(), a), ("B".into(), b)]);
        assert!(rep.within_variant.is_empty());
        assert_eq!(rep.cross_variant.len(), 1);
        assert_eq!(
            rep.cross_variant[0].locations,
            vec![("A".to_string(), Split::Train), ("B".to_string(), Split::Test)]
        );
        assert!(rep.to_csv().contains("cross_variant,,g7,A:train;B:test,2"));
    }

    #[test]
    fn disjoint_single_variant_is_clean_but_reports_documents() {
        let recs = vec![
            rec("a", "g1", Split::Train, "d1"),
            rec("b", "g1", Split::Train, "d2"),
            rec("c", "g2", Split::Test, "d1"),
        ];
        let rep = leakage_audit(&[("v".into(), recs)]);
        assert!(rep.is_clean());
        assert_eq!(rep.document_overlap[0].shared_documents, 1);
    }

    #[test]
    fn within_variant_leak() {
        let recs = vec![rec("a", "g1", Split::Train, "d1"), rec("b", "g1", Split::Dev, "d2")];
        let rep = leakage_audit(&[("v".into(), recs)]);
        assert_eq!(rep.within_variant[0].splits, vec![Split::Train, Split::Dev]);
        assert!(!rep.is_clean());
    }

    proptest! {
        #[test]
        fn split_output_never_leaks(groups in prop::collection::vec(1usize..5, 3..60), seed in any::<u64>()) {
            let mut recs = Vec::new();
            for (g, &n) in groups.iter().enumerate() {
                for i in 0..n {
                    recs.push(rec(&format!("e{g}-{i}"), &format!("g{g}"), Split::Train, "d"));
                }
            }
            let assignment = group_disjoint_split(&recs, SplitRatios::new(0.6, 0.2, 0.2).unwrap(), seed).unwrap();
            assignment.apply(&mut recs);
            prop_assert!(leakage_audit(&[("v".into(), recs)]).within_variant.is_empty());
        }
    }
}
