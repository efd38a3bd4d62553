use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::{prediction_coverage, MetricsError, PredictionRecord};
use crate::manifest::{Label, ManifestRecord};

/// Counts indexed `[gold][predicted]` in SUPPORT, REFUTE, NEI order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix(pub [[usize; 3]; 3]);

impl ConfusionMatrix {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        let mut m = [[0; 3]; 3];
        for (g, p) in pairs {
            m[g.index()][p.index()] += 1;
        }
        ConfusionMatrix(m)
    }

    pub fn total(&self) -> usize {
        self.0.iter().flatten().sum()
    }

    /// Precision, recall and F1 for one label, with 0/0 taken as 0.
    pub fn scores(&self, label: Label) -> LabelScores {
        let k = label.index();
        let tp = self.0[k][k];
        let predicted: usize = (0..3).map(|g| self.0[g][k]).sum();
        let support: usize = self.0[k].iter().sum();
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        // 2PR/(P+R) written over counts, so the value is a single rounding of the exact ratio.
        let f1 = ratio(2 * tp, predicted + support);
        LabelScores { precision, recall, f1, support }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabelScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub n: usize,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub per_label: [LabelScores; 3],
    pub nei_f1: f64,
    /// Absent when the gold set holds a single label.
    macro_f1: Option<f64>,
    gold_labels: Vec<Label>,
}

impl ClassificationReport {
    /// Unweighted mean F1 over the three labels, or a refusal when the gold
    /// set is one-class.
    pub fn macro_f1(&self) -> Result<f64, MetricsError> {
        match (self.macro_f1, self.gold_labels.as_slice()) {
            (Some(m), _) => Ok(m),
            (None, [only]) => Err(MetricsError::MacroF1Refused { label: only.to_string() }),
            (None, _) => Err(MetricsError::Empty("gold labels")),
        }
    }

    pub fn is_one_class(&self) -> bool {
        self.gold_labels.len() < 2
    }
}

/// Metrics from aligned label sequences.
pub fn classification_from_labels(gold: &[Label], pred: &[Label]) -> ClassificationReport {
    assert_eq!(gold.len(), pred.len(), "gold and predictions must align");
    let confusion = ConfusionMatrix::from_pairs(gold.iter().copied().zip(pred.iter().copied()));
    let n = gold.len();
    let correct: usize = (0..3).map(|k| confusion.0[k][k]).sum();
    let per_label = Label::ALL.map(|l| confusion.scores(l));
    let gold_labels: Vec<Label> = gold.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let macro_f1 = (gold_labels.len() >= 2).then(|| per_label.iter().map(|s| s.f1).sum::<f64>() / 3.0);
    ClassificationReport {
        n,
        accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
        confusion,
        nei_f1: per_label[Label::Nei.index()].f1,
        per_label,
        macro_f1,
        gold_labels,
    }
}

/// Joins gold and predictions on example id; requires complete coverage.
pub fn classification_metrics(
    gold: &[ManifestRecord],
    preds: &[PredictionRecord],
) -> Result<ClassificationReport, MetricsError> {
    if gold.is_empty() {
        return Err(MetricsError::Empty("gold manifest"));
    }
    let cov = prediction_coverage(gold.iter().map(|r| r.example_id.as_str()), preds);
    if !cov.is_complete() {
        return Err(MetricsError::IncompleteCoverage {
            coverage: cov.coverage,
            missing: cov.missing.len(),
            duplicated: cov.duplicated.len(),
        });
    }
    let by_id: HashMap<&str, Label> = preds.iter().map(|p| (p.example_id.as_str(), p.pred_label)).collect();
    let gold_labels: Vec<Label> = gold.iter().map(|r| r.label).collect();
    let pred_labels: Vec<Label> = gold.iter().map(|r| by_id[r.example_id.as_str()]).collect();
    Ok(classification_from_labels(&gold_labels, &pred_labels))
}
