use std::collections::BTreeMap;

use serde::Serialize;

use super::MetricsError;
use crate::manifest::ConstructionFamily;

/// Mean, sample standard deviation, minimum and maximum across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

/// Uses the n−1 denominator; `sd` is 0 for a single seed.
pub fn seed_aggregate(values: &[f64]) -> Result<SeedSummary, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty("seed values"));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n == 1 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SeedSummary { n, mean, sd, min, max })
}

/// NEI-F1 cells keyed by (train family, eval family).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NeiF1Matrix {
    pub cells: BTreeMap<ConstructionFamily, BTreeMap<ConstructionFamily, f64>>,
}

impl NeiF1Matrix {
    pub fn insert(&mut self, train: ConstructionFamily, eval: ConstructionFamily, value: f64) {
        self.cells.entry(train).or_default().insert(eval, value);
    }

    pub fn get(&self, train: ConstructionFamily, eval: ConstructionFamily) -> Option<f64> {
        self.cells.get(&train)?.get(&eval).copied()
    }

    pub fn trains(&self) -> impl Iterator<Item = ConstructionFamily> + '_ {
        self.cells.keys().copied()
    }
}

/// Matched performance against the mean of the two hard evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DropRow {
    pub train: ConstructionFamily,
    pub matched: f64,
    pub bm25: f64,
    pub cited: f64,
    pub hard_drop: f64,
}

/// `hard_drop = matched − (bm25 + cited) / 2` for every train row.
pub fn drop_summary(matrix: &NeiF1Matrix) -> Result<Vec<DropRow>, MetricsError> {
    use ConstructionFamily::{Bm25NearMiss, CitedNonRationale};
    matrix
        .trains()
        .map(|train| {
            let cell = |column| matrix.get(train, column).ok_or(MetricsError::MissingColumn { train, column });
            let matched = cell(train)?;
            let bm25 = cell(Bm25NearMiss)?;
            let cited = cell(CitedNonRationale)?;
            Ok(DropRow { train, matched, bm25, cited, hard_drop: matched - (bm25 + cited) / 2.0 })
        })
        .collect()
}
