use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{MetricsError, PROBABILITY_SUM_TOLERANCE};
use crate::manifest::Label;

/// One model's output for one example.
///
/// This is the interchange format: neural verifiers trained elsewhere emit
/// the same line-delimited records the shallow probes write.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub example_id: String,
    pub model_id: String,
    pub seed: u64,
    pub pred_label: Label,
    pub p_support: f64,
    pub p_refute: f64,
    pub p_nei: f64,
}

/// Index of the largest probability, ties going to the earlier label in
/// SUPPORT < REFUTE < NEI order. The flag reports whether a tie occurred.
pub fn argmax_label(probs: [f64; 3]) -> (Label, bool) {
    let mut best = 0;
    for k in 1..3 {
        if probs[k] > probs[best] {
            best = k;
        }
    }
    let tie = (0..3).any(|k| k != best && probs[k] == probs[best]);
    (Label::ALL[best], tie)
}

impl PredictionRecord {
    pub fn from_probs(example_id: impl Into<String>, model_id: impl Into<String>, seed: u64, probs: [f64; 3]) -> Self {
        PredictionRecord {
            example_id: example_id.into(),
            model_id: model_id.into(),
            seed,
            pred_label: argmax_label(probs).0,
            p_support: probs[0],
            p_refute: probs[1],
            p_nei: probs[2],
        }
    }

    pub fn probs(&self) -> [f64; 3] {
        [self.p_support, self.p_refute, self.p_nei]
    }

    pub fn prob(&self, label: Label) -> f64 {
        self.probs()[label.index()]
    }

    pub fn is_tie(&self) -> bool {
        argmax_label(self.probs()).1
    }

    /// Ingest checks: finite non-negative probabilities summing to 1 and a
    /// label equal to the argmax. Failing logs are rejected, never renormalized.
    pub fn check(&self) -> Result<(), String> {
        let p = self.probs();
        if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(format!("{}: probabilities must be finite and non-negative", self.example_id));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(format!("{}: probabilities sum to {sum}", self.example_id));
        }
        let (arg, _) = argmax_label(p);
        if arg != self.pred_label {
            return Err(format!("{}: pred_label {} is not the argmax {}", self.example_id, self.pred_label, arg));
        }
        Ok(())
    }
}

pub fn parse_predictions<R: BufRead>(reader: R) -> Result<Vec<PredictionRecord>, MetricsError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PredictionRecord = serde_json::from_str(&line)
            .map_err(|e| MetricsError::BadPrediction { line: i + 1, detail: e.to_string() })?;
        rec.check().map_err(|detail| MetricsError::BadPrediction { line: i + 1, detail })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_predictions(path: impl AsRef<std::path::Path>) -> Result<Vec<PredictionRecord>, MetricsError> {
    parse_predictions(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn write_predictions<W: Write>(preds: &[PredictionRecord], mut out: W) -> std::io::Result<()> {
    for p in preds {
        serde_json::to_writer(&mut out, p)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
