use std::collections::HashMap;

use serde::Serialize;

use super::{bootstrap_ci, bootstrap_ci_grouped, prediction_coverage, BootstrapConfig, Interval, MetricsError};
use super::{PredictionRecord, ResampleMode};
use crate::manifest::{Label, ManifestRecord};

/// Scores on an all-NEI subset. There is deliberately no Macro-F1 field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneClassReport {
    pub n: usize,
    pub nei_recall: f64,
    pub false_support_rate: f64,
    pub false_refute_rate: f64,
    pub mean_p_nei: f64,
    pub mean_p_support: f64,
    pub mean_p_refute: f64,
    pub intervals: Option<OneClassIntervals>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneClassIntervals {
    pub nei_recall: Interval,
    pub false_support_rate: Interval,
    pub false_refute_rate: Interval,
}

fn rate_of(label: Label) -> impl Fn(&[(String, Label)]) -> f64 {
    move |xs| xs.iter().filter(|x| x.1 == label).count() as f64 / xs.len() as f64
}

/// NEI recall and false SUPPORT/REFUTE rates over validated NEI examples.
///
/// With `bootstrap`, intervals are attached; `ResampleMode::Groups` resamples
/// by `group_id`.
pub fn one_class_metrics(
    gold: &[ManifestRecord],
    preds: &[PredictionRecord],
    bootstrap: Option<(&BootstrapConfig, ResampleMode)>,
) -> Result<OneClassReport, MetricsError> {
    if gold.is_empty() {
        return Err(MetricsError::Empty("gold subset"));
    }
    if let Some(r) = gold.iter().find(|r| r.label != Label::Nei) {
        return Err(MetricsError::NotOneClass { example_id: r.example_id.clone(), label: r.label.to_string() });
    }
    let cov = prediction_coverage(gold.iter().map(|r| r.example_id.as_str()), preds);
    if !cov.is_complete() {
        return Err(MetricsError::IncompleteCoverage {
            coverage: cov.coverage,
            missing: cov.missing.len(),
            duplicated: cov.duplicated.len(),
        });
    }
    let by_id: HashMap<&str, &PredictionRecord> = preds.iter().map(|p| (p.example_id.as_str(), p)).collect();
    let joined: Vec<&PredictionRecord> = gold.iter().map(|r| by_id[r.example_id.as_str()]).collect();
    let n = gold.len();
    let count = |l: Label| joined.iter().filter(|p| p.pred_label == l).count() as f64 / n as f64;
    let mean = |l: Label| joined.iter().map(|p| p.prob(l)).sum::<f64>() / n as f64;

    let intervals = match bootstrap {
        None => None,
        Some((cfg, mode)) => {
            let rows: Vec<(String, Label)> =
                gold.iter().zip(&joined).map(|(r, p)| (r.group_id.clone(), p.pred_label)).collect();
            let ci = |l: Label| match mode {
                ResampleMode::Examples => bootstrap_ci(&rows, rate_of(l), cfg),
                ResampleMode::Groups => bootstrap_ci_grouped(&rows, |x| x.0.clone(), rate_of(l), cfg),
            };
            Some(OneClassIntervals {
                nei_recall: ci(Label::Nei)?,
                false_support_rate: ci(Label::Support)?,
                false_refute_rate: ci(Label::Refute)?,
            })
        }
    };

    Ok(OneClassReport {
        n,
        nei_recall: count(Label::Nei),
        false_support_rate: count(Label::Support),
        false_refute_rate: count(Label::Refute),
        mean_p_nei: mean(Label::Nei),
        mean_p_support: mean(Label::Support),
        mean_p_refute: mean(Label::Refute),
        intervals,
    })
}
