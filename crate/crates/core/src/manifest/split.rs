use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;

use super::record::{ManifestRecord, Split};
use super::ManifestError;
use crate::rng;

/// Target example fractions for train / dev / test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, dev: f64, test: f64) -> Result<Self, ManifestError> {
        let r = SplitRatios { train, dev, test };
        let parts = r.as_array();
        if parts.iter().any(|x| !x.is_finite() || *x < 0.0) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(ManifestError::InvalidRatios { ratios: parts });
        }
        Ok(r)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.train, self.dev, self.test]
    }
}

const BUCKETS: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

/// group_id → split. Iteration order is sorted by group id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitAssignment(pub BTreeMap<String, Split>);

impl SplitAssignment {
    pub fn get(&self, group_id: &str) -> Option<Split> {
        self.0.get(group_id).copied()
    }

    /// Overwrites the split of every record whose group is assigned.
    pub fn apply(&self, records: &mut [ManifestRecord]) {
        for r in records {
            if let Some(s) = self.get(&r.group_id) {
                r.split = s;
            }
        }
    }

    /// `group_id<TAB>split` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (g, s) in &self.0 {
            let _ = writeln!(out, "{g}\t{s}");
        }
        out
    }

    pub fn parse_tsv(text: &str) -> Result<Self, ManifestError> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (g, s) = line.split_once('\t').ok_or_else(|| ManifestError::InvalidField {
                line: i + 1,
                field: "split",
                value: line.to_string(),
            })?;
            let split = s.parse().map_err(|_| ManifestError::InvalidField {
                line: i + 1,
                field: "split",
                value: s.to_string(),
            })?;
            map.insert(g.to_string(), split);
        }
        Ok(SplitAssignment(map))
    }

    /// Example counts per bucket for the given records.
    pub fn example_counts(&self, records: &[ManifestRecord]) -> [usize; 3] {
        let mut counts = [0; 3];
        for r in records {
            if let Some(pos) = self.get(&r.group_id).and_then(|s| BUCKETS.iter().position(|b| *b == s)) {
                counts[pos] += 1;
            }
        }
        counts
    }
}

/// Assigns whole groups to train/dev/test.
///
/// Groups are sorted, shuffled with `seed`, then handed one at a time to the
/// non-empty bucket with the largest remaining example deficit (ties go to the
/// earlier bucket). Every record sharing a group id lands in one split.
pub fn group_disjoint_split(
    records: &[ManifestRecord],
    ratios: SplitRatios,
    seed: u64,
) -> Result<SplitAssignment, ManifestError> {
    let mut sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        *sizes.entry(r.group_id.as_str()).or_default() += 1;
    }
    let weights = ratios.as_array();
    let active: Vec<usize> = (0..3).filter(|&k| weights[k] > 0.0).collect();
    if sizes.len() < active.len() {
        return Err(ManifestError::InsufficientGroups { groups: sizes.len(), buckets: active.len() });
    }

    let mut groups: Vec<(&str, usize)> = sizes.into_iter().collect();
    groups.shuffle(&mut rng::seeded(seed));

    let total: usize = groups.iter().map(|(_, n)| n).sum();
    let targets: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut filled = [0usize; 3];
    let mut out = BTreeMap::new();
    for (group, size) in groups {
        let mut best = active[0];
        for &k in &active[1..] {
            if targets[k] - filled[k] as f64 > targets[best] - filled[best] as f64 {
                best = k;
            }
        }
        filled[best] += size;
        out.insert(group.to_string(), BUCKETS[best]);
    }
    Ok(SplitAssignment(out))
}
