use std::collections::HashMap;

use serde::Serialize;

use super::{prediction_coverage, MetricsError, PredictionRecord};
use crate::construct::FixedClaimPair;
use crate::manifest::Label;

/// Per-pair diagnostic row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairOutcome {
    pub claim_id: String,
    pub reference_label: Label,
    pub p_ref_reference: f64,
    pub p_ref_hard: f64,
    pub delta: f64,
    pub drop_success: bool,
    pub reference_correct: bool,
    pub hard_predicted_nei: bool,
    pub strict_swap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedClaimReport {
    pub n_pairs: usize,
    pub pairs: Vec<PairOutcome>,
    pub mean_delta: f64,
    pub prob_drop_success: f64,
    pub strict_swap_success: f64,
    pub hard_recall: f64,
    pub reference_accuracy: f64,
    pub coverage_ok: bool,
}

/// Reference-label probability drop between the two sides of each pair.
///
/// Coverage over both sides is checked before anything is computed.
pub fn fixed_claim_diagnostics(
    pairs: &[FixedClaimPair],
    preds: &[PredictionRecord],
) -> Result<FixedClaimReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::Empty("fixed-claim pairs"));
    }
    let expected = pairs.iter().flat_map(|p| [p.reference.example_id.as_str(), p.hard.example_id.as_str()]);
    let cov = prediction_coverage(expected, preds);
    if !cov.is_complete() {
        return Err(MetricsError::IncompleteCoverage {
            coverage: cov.coverage,
            missing: cov.missing.len(),
            duplicated: cov.duplicated.len(),
        });
    }
    let by_id: HashMap<&str, &PredictionRecord> = preds.iter().map(|p| (p.example_id.as_str(), p)).collect();
    let outcomes: Vec<PairOutcome> = pairs
        .iter()
        .map(|pair| {
            let y = pair.reference_label();
            let r = by_id[pair.reference.example_id.as_str()];
            let h = by_id[pair.hard.example_id.as_str()];
            let delta = r.prob(y) - h.prob(y);
            let reference_correct = r.pred_label == y;
            let hard_predicted_nei = h.pred_label == Label::Nei;
            PairOutcome {
                claim_id: pair.claim_id.clone(),
                reference_label: y,
                p_ref_reference: r.prob(y),
                p_ref_hard: h.prob(y),
                delta,
                drop_success: delta > 0.0,
                reference_correct,
                hard_predicted_nei,
                strict_swap: reference_correct && hard_predicted_nei,
            }
        })
        .collect();
    let n = outcomes.len() as f64;
    let frac = |f: fn(&PairOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as f64 / n;
    Ok(FixedClaimReport {
        n_pairs: outcomes.len(),
        mean_delta: outcomes.iter().map(|o| o.delta).sum::<f64>() / n,
        prob_drop_success: frac(|o| o.drop_success),
        strict_swap_success: frac(|o| o.strict_swap),
        hard_recall: frac(|o| o.hard_predicted_nei),
        reference_accuracy: frac(|o| o.reference_correct),
        coverage_ok: true,
        pairs: outcomes,
    })
}
