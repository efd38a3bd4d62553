use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::AuditError;
use crate::probe::{train_softmax, SparseVector, TrainConfig};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeparabilityConfig {
    pub folds: usize,
    /// Minimum examples per group before metrics are reported.
    pub power_floor: usize,
    pub train: TrainConfig,
}

impl Default for SeparabilityConfig {
    fn default() -> Self {
        SeparabilityConfig {
            folds: 5,
            power_floor: 30,
            train: TrainConfig { iters: 500, ..TrainConfig::default() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStatus {
    Completed,
    Underpowered,
}

impl ProbeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ProbeStatus::Completed => "completed",
            ProbeStatus::Underpowered => "underpowered",
        }
    }
}

/// Cross-validated accuracy of telling group A from group B. Metrics are
/// withheld when either group is below the power floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparabilityResult {
    pub accuracy: Option<f64>,
    pub macro_f1: Option<f64>,
    pub n_per_class: (usize, usize),
    pub status: ProbeStatus,
}

impl SeparabilityResult {
    pub const CSV_HEADER: [&'static str; 4] = ["comparison", "accuracy", "macro_f1", "status"];

    pub fn csv_row(&self, comparison: &str) -> Vec<String> {
        let fmt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.3}"));
        vec![comparison.to_string(), fmt(self.accuracy), fmt(self.macro_f1), self.status.as_str().to_string()]
    }
}

/// Stratified fold index of every example of each group. Depends only on
/// the group sizes, `folds` and `seed`.
pub fn fold_assignment(n_a: usize, n_b: usize, folds: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let assign = |n: usize, key: &str| {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng::stream(seed, key));
        let mut fold = vec![0; n];
        for (rank, &i) in order.iter().enumerate() {
            fold[i] = rank % folds;
        }
        fold
    };
    (assign(n_a, "fold-a"), assign(n_b, "fold-b"))
}

fn standardize(train: &[&Vec<f64>], dim: usize) -> Vec<(f64, f64)> {
    let n = train.len() as f64;
    (0..dim)
        .map(|c| {
            let mean = train.iter().map(|r| r[c]).sum::<f64>() / n;
            let var = train.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n;
            (mean, if var > 0.0 { var.sqrt() } else { 1.0 })
        })
        .collect()
}

fn scaled(row: &[f64], stats: &[(f64, f64)]) -> SparseVector {
    let v: Vec<f64> = row.iter().zip(stats).map(|(x, (m, s))| (x - m) / s).collect();
    SparseVector::from_dense(&v).expect("standardized features are finite")
}

/// K-fold binary logistic regression over standardized dense features.
pub fn separability_probe(
    group_a: &[Vec<f64>],
    group_b: &[Vec<f64>],
    cfg: &SeparabilityConfig,
) -> Result<SeparabilityResult, AuditError> {
    if group_a.is_empty() {
        return Err(AuditError::EmptyGroup("group A"));
    }
    if group_b.is_empty() {
        return Err(AuditError::EmptyGroup("group B"));
    }
    if cfg.folds < 2 {
        return Err(AuditError::InvalidConfig(format!("folds must be at least 2, got {}", cfg.folds)));
    }
    let dim = group_a[0].len();
    if let Some(r) = group_a.iter().chain(group_b).find(|r| r.len() != dim) {
        return Err(AuditError::Ragged { expected: dim, found: r.len() });
    }
    let n_per_class = (group_a.len(), group_b.len());
    let smallest = group_a.len().min(group_b.len());
    if smallest < cfg.power_floor || smallest < 2 {
        return Ok(SeparabilityResult { accuracy: None, macro_f1: None, n_per_class, status: ProbeStatus::Underpowered });
    }
    let folds = cfg.folds.min(smallest);
    let (fa, fb) = fold_assignment(group_a.len(), group_b.len(), folds, cfg.train.seed);
    let rows: Vec<(&Vec<f64>, usize, usize)> = group_a
        .iter()
        .zip(&fa)
        .map(|(r, &f)| (r, 0, f))
        .chain(group_b.iter().zip(&fb).map(|(r, &f)| (r, 1, f)))
        .collect();

    // confusion[gold][pred]
    let mut confusion = [[0usize; 2]; 2];
    for fold in 0..folds {
        let train: Vec<&(&Vec<f64>, usize, usize)> = rows.iter().filter(|r| r.2 != fold).collect();
        let stats = standardize(&train.iter().map(|r| r.0).collect::<Vec<_>>(), dim);
        let xs: Vec<SparseVector> = train.iter().map(|r| scaled(r.0, &stats)).collect();
        let ys: Vec<usize> = train.iter().map(|r| r.1).collect();
        let (model, _) = train_softmax(&xs, &ys, 2, &cfg.train)?;
        for r in rows.iter().filter(|r| r.2 == fold) {
            let p = model.predict_proba(&scaled(r.0, &stats))?;
            let pred = usize::from(p[1] > p[0]);
            confusion[r.1][pred] += 1;
        }
    }
    let n = rows.len() as f64;
    let accuracy = (confusion[0][0] + confusion[1][1]) as f64 / n;
    let f1 = |k: usize| {
        let tp = confusion[k][k] as f64;
        let denom = 2.0 * tp + confusion[k][1 - k] as f64 + confusion[1 - k][k] as f64;
        if denom == 0.0 { 0.0 } else { 2.0 * tp / denom }
    };
    Ok(SeparabilityResult {
        accuracy: Some(accuracy),
        macro_f1: Some((f1(0) + f1(1)) / 2.0),
        n_per_class,
        status: ProbeStatus::Completed,
    })
}
