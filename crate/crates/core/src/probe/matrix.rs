use std::collections::BTreeMap;

use serde::Serialize;

use super::{FeatureConfig, FeatureSpec, LinearModel, ProbeError, TrainConfig};
use crate::manifest::{leakage_audit, ConstructionFamily, Label, ManifestRecord, Split};
use crate::metrics::{classification_metrics, seed_aggregate, NeiF1Matrix, PredictionRecord, SeedSummary};

/// One construction variant: its training manifest and evaluation manifest.
#[derive(Debug, Clone)]
pub struct Variant {
    pub family: ConstructionFamily,
    pub train: Vec<ManifestRecord>,
    pub eval: Vec<ManifestRecord>,
}

impl Variant {
    /// Train-split records train; test-split records evaluate.
    pub fn from_records(family: ConstructionFamily, records: &[ManifestRecord]) -> Self {
        let pick = |s: Split| records.iter().filter(|r| r.split == s).cloned().collect();
        Variant { family, train: pick(Split::Train), eval: pick(Split::Test) }
    }
}

#[derive(Debug, Clone)]
pub struct MatrixConfig {
    pub spec: FeatureSpec,
    pub seeds: Vec<u64>,
    pub features: FeatureConfig,
    pub train: TrainConfig,
    pub workers: usize,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        MatrixConfig {
            spec: FeatureSpec::TfidfClaimEvidence,
            seeds: vec![13, 17, 23, 29, 37],
            features: FeatureConfig::default(),
            train: TrainConfig::default(),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixCell {
    pub train: ConstructionFamily,
    pub eval: ConstructionFamily,
    pub seed: u64,
    pub accuracy: f64,
    pub nei_f1: f64,
    pub macro_f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub train: ConstructionFamily,
    pub eval: ConstructionFamily,
    pub nei_f1: SeedSummary,
    pub macro_f1: Option<SeedSummary>,
}

/// Cells sorted by (train, eval, seed) plus every prediction log.
#[derive(Debug, Clone)]
pub struct MatrixRun {
    pub spec: FeatureSpec,
    pub cells: Vec<MatrixCell>,
    pub logs: BTreeMap<(ConstructionFamily, ConstructionFamily, u64), Vec<PredictionRecord>>,
}

impl MatrixRun {
    /// Seed aggregates per (train, eval).
    pub fn aggregate(&self) -> Vec<CellSummary> {
        let mut by_cell: BTreeMap<(ConstructionFamily, ConstructionFamily), Vec<&MatrixCell>> = BTreeMap::new();
        for c in &self.cells {
            by_cell.entry((c.train, c.eval)).or_default().push(c);
        }
        by_cell
            .into_iter()
            .map(|((train, eval), cs)| {
                let nei: Vec<f64> = cs.iter().map(|c| c.nei_f1).collect();
                let macro_: Option<Vec<f64>> = cs.iter().map(|c| c.macro_f1).collect();
                CellSummary {
                    train,
                    eval,
                    nei_f1: seed_aggregate(&nei).expect("every cell has a seed"),
                    macro_f1: macro_.map(|m| seed_aggregate(&m).expect("every cell has a seed")),
                }
            })
            .collect()
    }

    /// Seed-mean NEI-F1 per (train, eval).
    pub fn nei_f1_matrix(&self) -> NeiF1Matrix {
        let mut m = NeiF1Matrix::default();
        for s in self.aggregate() {
            m.insert(s.train, s.eval, s.nei_f1.mean);
        }
        m
    }
}

fn gold_signature(records: &[ManifestRecord]) -> Vec<(String, Label, String, String)> {
    let mut sig: Vec<_> = records
        .iter()
        .filter(|r| r.label != Label::Nei)
        .map(|r| (r.example_id.clone(), r.label, r.claim.clone(), r.evidence_text()))
        .collect();
    sig.sort();
    sig
}

/// Variants must share their SUPPORT/REFUTE portions, and no group may be
/// both trained on and evaluated.
pub fn check_variants(variants: &[Variant]) -> Result<(), ProbeError> {
    let Some(first) = variants.first() else {
        return Err(ProbeError::Empty("variants"));
    };
    let want = (gold_signature(&first.train), gold_signature(&first.eval));
    for v in &variants[1..] {
        for (side, got, reference) in
            [("train", gold_signature(&v.train), &want.0), ("eval", gold_signature(&v.eval), &want.1)]
        {
            if &got != reference {
                let detail = match got.iter().zip(reference).find(|(a, b)| a != b) {
                    Some((a, _)) => format!("{side} record {} differs", a.0),
                    None => format!("{side} has {} gold records, expected {}", got.len(), reference.len()),
                };
                return Err(ProbeError::VariantMismatch { family: v.family, reference: first.family, detail });
            }
        }
    }
    let mut pooled = Vec::new();
    for v in variants {
        pooled.extend(v.train.iter().cloned().map(|mut r| {
            r.split = Split::Train;
            r
        }));
        pooled.extend(v.eval.iter().cloned().map(|mut r| {
            r.split = Split::Test;
            r
        }));
    }
    let report = leakage_audit(&[("matrix".to_string(), pooled)]);
    match report.within_variant.first() {
        Some(leak) => Err(ProbeError::GroupOverlap { group_id: leak.group_id.clone() }),
        None => Ok(()),
    }
}

type CellOutput = Vec<(MatrixCell, Vec<PredictionRecord>)>;

fn run_job(variants: &[Variant], train: &Variant, seed: u64, cfg: &MatrixConfig) -> Result<CellOutput, ProbeError> {
    let tc = TrainConfig { seed, ..cfg.train };
    let model = LinearModel::train(cfg.spec, &train.train, train.family, cfg.features.clone(), &tc)?;
    variants
        .iter()
        .map(|ev| {
            let preds = model.predict(&ev.eval)?;
            let rep = classification_metrics(&ev.eval, &preds)?;
            let cell = MatrixCell {
                train: train.family,
                eval: ev.family,
                seed,
                accuracy: rep.accuracy,
                nei_f1: rep.nei_f1,
                macro_f1: rep.macro_f1().ok(),
            };
            Ok((cell, preds))
        })
        .collect()
}

/// Trains one model per (train family, seed) and scores it on every
/// variant's evaluation manifest. Jobs run on up to `workers` threads;
/// results are ordered by cell key, so output does not depend on scheduling.
pub fn run_construction_matrix(variants: &[Variant], cfg: &MatrixConfig) -> Result<MatrixRun, ProbeError> {
    check_variants(variants)?;
    if cfg.seeds.is_empty() {
        return Err(ProbeError::Empty("seeds"));
    }
    let jobs: Vec<(&Variant, u64)> = variants.iter().flat_map(|v| cfg.seeds.iter().map(move |&s| (v, s))).collect();
    let workers = cfg.workers.clamp(1, jobs.len());
    let chunk = jobs.len().div_ceil(workers);
    let results: Vec<Result<CellOutput, ProbeError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || part.iter().map(|(v, s)| run_job(variants, v, *s, cfg)).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("matrix worker panicked")).collect()
    });
    let mut cells = Vec::new();
    let mut logs = BTreeMap::new();
    for r in results {
        for (cell, preds) in r? {
            logs.insert((cell.train, cell.eval, cell.seed), preds);
            cells.push(cell);
        }
    }
    cells.sort_by(|a, b| (a.train, a.eval, a.seed).cmp(&(b.train, b.eval, b.seed)));
    Ok(MatrixRun { spec: cfg.spec, cells, logs })
}
