//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use neicap::audit::{separability_probe, shallow_features, Lexicons, SeparabilityConfig};
use neicap::construct::{construct_variant, FixedClaimPair};
use neicap::manifest::{
    group_disjoint_split, leakage_audit, manifest_to_string, ConstructionFamily, EvidenceUnit, Label, ManifestRecord,
    Split, SplitRatios, ValidationStatus,
};
use neicap::metrics::{
    classification_from_labels, drop_summary, fixed_claim_diagnostics, one_class_metrics, prediction_coverage,
    BootstrapConfig, NeiF1Matrix, PredictionRecord,
};
use neicap::probe::{run_construction_matrix, train_softmax, MatrixConfig, SoftmaxRegression, SparseVector, TrainConfig, Variant};
use neicap::report::{lock_files, release_audit, UnavailableCase, WorkspaceDecl, WORKSPACE_FILE};
use neicap::retrieval::{tokenize, Bm25Index, Bm25Params};
use neicap::rng;
use neicap::synthetic::{synthetic_corpus, SyntheticConfig};
use neicap::validate::{
    blinding_violations, build_audit_packet, merge_consensus, validity_rates, AdjudicationLabel, AdjudicationRecord,
    Subtype,
};
use neicap_serve::{router, AppState, ServeConfig, SessionSpec};
use rand::Rng;
use serde_json::json;
use tower::ServiceExt;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { name: "one-class metric fidelity", budget: Some(Duration::from_secs(1)), run: one_class },
        Criterion { name: "matrix/drop arithmetic", budget: Some(Duration::from_secs(1)), run: drop_arithmetic },
        Criterion { name: "construction-shift reproduction", budget: Some(Duration::from_secs(60)), run: construction_shift },
        Criterion { name: "separability audit", budget: Some(Duration::from_secs(5)), run: separability },
        Criterion { name: "validation math", budget: Some(Duration::from_secs(10)), run: validation_math },
        Criterion { name: "property suites", budget: None, run: property_suites },
        Criterion { name: "blinding", budget: None, run: blinding },
        Criterion { name: "release audit", budget: None, run: release },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let mut outcome = (c.run)();
        let took = start.elapsed();
        if let (Ok(_), Some(budget)) = (&outcome, c.budget) {
            if took > budget {
                outcome = Err(format!("took {took:.2?}, budget {budget:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS  {:<34} {:>9.2?}  {detail}", c.name, took),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:<34} {:>9.2?}  {detail}", c.name, took);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn nei_record(i: usize, family: ConstructionFamily) -> ManifestRecord {
    ManifestRecord::new(format!("x{i}"), format!("c{i}"), "claim", vec![EvidenceUnit::text("NO EVIDENCE")], Label::Nei, family)
}

fn one_class() -> Outcome {
    let gold: Vec<ManifestRecord> = (0..54).map(|i| nei_record(i, ConstructionFamily::Placeholder)).collect();
    let preds: Vec<PredictionRecord> = (0..54)
        .map(|i| {
            let p = if i < 47 { [0.8, 0.15, 0.05] } else { [0.15, 0.8, 0.05] };
            PredictionRecord::from_probs(format!("x{i}"), "m", 13, p)
        })
        .collect();
    let r = one_class_metrics(&gold, &preds, None).map_err(|e| e.to_string())?;
    let close = |x: f64, want: f64| (x - want).abs() <= 0.001;
    ensure!(r.n == 54, "n = {}", r.n);
    ensure!(close(r.nei_recall, 0.000), "NEI recall {:.4}", r.nei_recall);
    ensure!(close(r.false_support_rate, 0.870), "false SUPPORT {:.4}", r.false_support_rate);
    ensure!(close(r.false_refute_rate, 0.130), "false REFUTE {:.4}", r.false_refute_rate);
    Ok(format!(
        "recall {:.3}, false SUPPORT {:.3}, false REFUTE {:.3}",
        r.nei_recall, r.false_support_rate, r.false_refute_rate
    ))
}

fn drop_arithmetic() -> Outcome {
    use ConstructionFamily::*;
    let mut m = NeiF1Matrix::default();
    m.insert(RandomIrrelevant, RandomIrrelevant, 0.995);
    m.insert(RandomIrrelevant, Bm25NearMiss, 0.445);
    m.insert(RandomIrrelevant, CitedNonRationale, 0.294);
    let rows = drop_summary(&m).map_err(|e| e.to_string())?;
    let d = rows[0].hard_drop;
    ensure!((d - 0.625).abs() <= 0.0005 + 1e-12, "drop {d}");
    Ok(format!("random_irrelevant drop {d:.4}"))
}

fn synthetic_variant(family: ConstructionFamily) -> Result<Vec<ManifestRecord>, String> {
    let corpus = synthetic_corpus(&SyntheticConfig::default());
    construct_variant(&corpus, family, &Default::default()).map_err(|e| format!("{family}: {e}"))
}

fn construction_shift() -> Outcome {
    use ConstructionFamily::*;
    let variants = [Placeholder, Bm25NearMiss]
        .into_iter()
        .map(|f| Ok(Variant::from_records(f, &synthetic_variant(f)?)))
        .collect::<Result<Vec<_>, String>>()?;
    let cfg = MatrixConfig::default();
    let run = run_construction_matrix(&variants, &cfg).map_err(|e| e.to_string())?;
    let mut matched = Vec::new();
    let mut hard = Vec::new();
    for seed in &cfg.seeds {
        let cell = |eval| {
            run.cells
                .iter()
                .find(|c| c.train == Placeholder && c.eval == eval && c.seed == *seed)
                .map(|c| c.nei_f1)
                .ok_or(format!("no cell for seed {seed}"))
        };
        let (m, h) = (cell(Placeholder)?, cell(Bm25NearMiss)?);
        ensure!(m >= 0.95, "seed {seed}: matched placeholder NEI-F1 {m:.3} < 0.95");
        ensure!(h <= 0.10, "seed {seed}: BM25 near-miss NEI-F1 {h:.3} > 0.10");
        matched.push(m);
        hard.push(h);
    }
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("/");
    Ok(format!("seeds {:?}: matched {}, bm25 {}", cfg.seeds, fmt(&matched), fmt(&hard)))
}

fn separability() -> Outcome {
    use ConstructionFamily::*;
    let lex = Lexicons::default();
    let pool = |f| -> Result<Vec<Vec<f64>>, String> {
        Ok(synthetic_variant(f)?
            .iter()
            .filter(|r| r.label == Label::Nei && r.split == Split::Test)
            .map(|r| shallow_features(r, &lex).to_dense())
            .collect())
    };
    let (a, b) = (pool(Placeholder)?, pool(Bm25NearMiss)?);
    ensure!(a.len() == 61 && b.len() == 61, "pool sizes {}/{}", a.len(), b.len());
    let cfg = SeparabilityConfig::default();
    let apart = separability_probe(&a, &b, &cfg).map_err(|e| e.to_string())?;
    let same = separability_probe(&a, &a, &cfg).map_err(|e| e.to_string())?;
    let acc = apart.accuracy.ok_or("placeholder vs bm25 withheld")?;
    let acc_same = same.accuracy.ok_or("identical pools withheld")?;
    ensure!(acc >= 0.99, "placeholder vs bm25 accuracy {acc:.3}");
    ensure!((acc_same - 0.5).abs() <= 0.1, "identical pools accuracy {acc_same:.3}");
    Ok(format!("61/61 placeholder vs bm25 {acc:.3}; identical pools {acc_same:.3}"))
}

/// 223 truly_insufficient (62 broad topic, 102 near miss, 31 partial,
/// 26 topic unrelated, 2 without subtype) and 27 contaminated items.
fn published_pool() -> Vec<AdjudicationRecord> {
    use AdjudicationLabel::*;
    let mut spec: Vec<(AdjudicationLabel, Option<Subtype>, usize)> = vec![
        (TrulyInsufficient, Some(Subtype::BroadTopic), 62),
        (TrulyInsufficient, Some(Subtype::NearMiss), 102),
        (TrulyInsufficient, Some(Subtype::Partial), 31),
        (TrulyInsufficient, Some(Subtype::TopicUnrelated), 26),
        (TrulyInsufficient, None, 2),
    ];
    spec.extend([(ActuallySupported, None, 15), (ActuallyContradicted, None, 7), (Ambiguous, None, 3), (InvalidOrUnreadable, None, 2)]);
    let mut out = Vec::new();
    for (label, subtype, n) in spec {
        for _ in 0..n {
            out.push(AdjudicationRecord::new(format!("p-{:03}", out.len()), "a", label, subtype));
        }
    }
    out
}

fn validation_math() -> Outcome {
    let a = published_pool();
    let b: Vec<AdjudicationRecord> = a.iter().map(|r| AdjudicationRecord { annotator_id: "b".into(), ..r.clone() }).collect();
    let outcome = merge_consensus(&a, &b, &[]).map_err(|e| e.to_string())?;
    ensure!(outcome.finals.len() == 250, "{} finalized", outcome.finals.len());
    let mut lows = Vec::new();
    let mut highs = Vec::new();
    for seed in [13, 17, 23, 29, 37] {
        let cfg = BootstrapConfig { seed, ..BootstrapConfig::default() };
        let s = validity_rates(&outcome, &cfg).map_err(|e| e.to_string())?;
        ensure!(s.valid_nei_rate.estimate == 223.0 / 250.0, "valid {}", s.valid_nei_rate.estimate);
        ensure!(format!("{:.3}", s.valid_nei_rate.estimate) == "0.892", "valid {}", s.valid_nei_rate.estimate);
        ensure!(format!("{:.3}", s.contamination_rate.estimate) == "0.108", "contamination {}", s.contamination_rate.estimate);
        ensure!(s.n_hard == 195, "hard count {}", s.n_hard);
        let (lo, hi) = (s.valid_nei_rate.low, s.valid_nei_rate.high);
        ensure!((lo - 0.852).abs() <= 0.02 && (hi - 0.928).abs() <= 0.02, "seed {seed}: interval [{lo:.3}, {hi:.3}]");
        lows.push(lo);
        highs.push(hi);
    }
    let span = |v: &[f64]| format!("{:.3}..{:.3}", v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    Ok(format!("valid 0.892, contamination 0.108, 5 seeds: low {}, high {}", span(&lows), span(&highs)))
}

fn property_suites() -> Outcome {
    let parts = [
        ("group split", group_split_fuzz as fn() -> Outcome),
        ("bm25 oracle", bm25_fuzz),
        ("gradient", gradient_fuzz),
        ("f1 oracle", f1_fuzz),
        ("macro refusal", macro_refusal_fuzz),
        ("coverage", coverage_hand_count),
        ("fixed-claim", fixed_claim_fixture),
    ];
    let mut notes = Vec::new();
    for (name, f) in parts {
        notes.push(f().map_err(|e| format!("{name}: {e}"))?);
    }
    Ok(notes.join("; "))
}

fn group_split_fuzz() -> Outcome {
    let mut checked = 0;
    for case in 0..1000u64 {
        let mut r = rng::indexed(101, case);
        let n_groups = r.random_range(3..40);
        let n_variants = r.random_range(1..4);
        let mut variants: Vec<(String, Vec<ManifestRecord>)> = Vec::new();
        for v in 0..n_variants {
            let mut recs = Vec::new();
            for i in 0..r.random_range(n_groups..3 * n_groups) {
                // The first variant covers every group so three splits can be filled.
                let g = if v == 0 && i < n_groups { i } else { r.random_range(0..n_groups) };
                let mut rec = nei_record(i, ConstructionFamily::Placeholder);
                rec.example_id = format!("v{v}-{i}");
                rec.group_id = format!("g{g}");
                recs.push(rec);
            }
            variants.push((format!("v{v}"), recs));
        }
        let all: Vec<ManifestRecord> = variants.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
        let dev = r.random_range(0.05..0.3);
        let test = r.random_range(0.05..0.3);
        let ratios = SplitRatios::new(1.0 - dev - test, dev, test).map_err(|e| e.to_string())?;
        let assignment = match group_disjoint_split(&all, ratios, case) {
            Ok(a) => a,
            Err(e) => return Err(format!("case {case}: {e}")),
        };
        for (_, recs) in &mut variants {
            assignment.apply(recs);
        }
        let mut seen: BTreeMap<&str, BTreeSet<Split>> = BTreeMap::new();
        for rec in variants.iter().flat_map(|(_, r)| r) {
            seen.entry(&rec.group_id).or_default().insert(rec.split);
        }
        ensure!(seen.values().all(|s| s.len() == 1), "case {case}: a group spans splits");
        ensure!(leakage_audit(&variants).is_clean(), "case {case}: leakage audit reports a leak");
        checked += 1;
    }
    Ok(format!("{checked} fuzzed manifests disjoint"))
}

/// Direct evaluation of the Okapi formula from raw token lists.
fn bm25_oracle(docs: &[Vec<String>], query: &[String], d: usize, k1: f64, b: f64) -> f64 {
    let n = docs.len() as f64;
    let avg = docs.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let len = docs[d].len() as f64;
    query
        .iter()
        .map(|t| {
            let tf = docs[d].iter().filter(|w| *w == t).count() as f64;
            if tf == 0.0 {
                return 0.0;
            }
            let df = docs.iter().filter(|doc| doc.contains(t)).count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len / avg))
        })
        .sum()
}

fn bm25_fuzz() -> Outcome {
    const VOCAB: [&str; 10] = ["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta", "iota", "kappa"];
    let mut scores = 0;
    let mut worst: f64 = 0.0;
    for case in 0..300u64 {
        let mut r = rng::indexed(202, case);
        let n_docs = r.random_range(1..=50);
        let texts: Vec<String> = (0..n_docs)
            .map(|_| (0..r.random_range(1..30)).map(|_| VOCAB[r.random_range(0..VOCAB.len())]).collect::<Vec<_>>().join(" "))
            .collect();
        let ids: Vec<String> = (0..n_docs).map(|i| format!("d{i:02}")).collect();
        let params = Bm25Params { k1: r.random_range(0.5..2.0), b: r.random_range(0.0..1.0) };
        let index = Bm25Index::from_texts(ids.iter().map(String::as_str).zip(&texts), params).map_err(|e| e.to_string())?;
        let docs: Vec<Vec<String>> = texts.iter().map(|t| tokenize(t)).collect();
        let query: Vec<String> = (0..r.random_range(1..6)).map(|_| VOCAB[r.random_range(0..VOCAB.len())].to_string()).collect();
        for (d, id) in ids.iter().enumerate() {
            let got = index.score(&query, id).map_err(|e| e.to_string())?;
            let want = bm25_oracle(&docs, &query, d, params.k1, params.b);
            worst = worst.max((got - want).abs());
            ensure!((got - want).abs() <= 1e-9, "case {case} {id}: {got} vs {want}");
            scores += 1;
        }
    }
    Ok(format!("{scores} bm25 scores within {worst:.1e}"))
}

fn gradient_fuzz() -> Outcome {
    let mut worst: f64 = 0.0;
    for case in 0..40u64 {
        let mut r = rng::indexed(303, case);
        let (k, dim, n) = (3, r.random_range(1..6), r.random_range(3..12));
        let xs: Vec<SparseVector> = (0..n)
            .map(|_| SparseVector::from_dense(&(0..dim).map(|_| r.random_range(-2.0..2.0)).collect::<Vec<f64>>()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let ys: Vec<usize> = (0..n).map(|_| r.random_range(0..k)).collect();
        let ws: Vec<f64> = (0..n).map(|_| r.random_range(0.5..2.0)).collect();
        let l2 = r.random_range(0.0..0.1);
        let mut model = SoftmaxRegression::zeros(k, dim);
        model.weights.iter_mut().for_each(|w| *w = r.random_range(-1.0..1.0));
        model.bias.iter_mut().for_each(|w| *w = r.random_range(-1.0..1.0));
        let (_, grad) = model.loss_and_grad(&xs, &ys, &ws, l2);
        let h = 1e-5;
        for j in 0..grad.len() {
            let nudge = |delta: f64| {
                let mut m = model.clone();
                if j < k * dim {
                    m.weights[j] += delta;
                } else {
                    m.bias[j - k * dim] += delta;
                }
                m.loss_and_grad(&xs, &ys, &ws, l2).0
            };
            let numeric = (nudge(h) - nudge(-h)) / (2.0 * h);
            let rel = (grad[j] - numeric).abs() / grad[j].abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
            ensure!(rel < 1e-4, "case {case} coordinate {j}: analytic {} vs numeric {numeric}", grad[j]);
        }
    }
    // Training on the same data twice gives identical weights.
    let xs = vec![SparseVector::from_dense(&[1.0, 0.0]).unwrap(), SparseVector::from_dense(&[0.0, 1.0]).unwrap()];
    let cfg = TrainConfig { iters: 50, ..TrainConfig::default() };
    let (a, _) = train_softmax(&xs, &[0, 2], 3, &cfg).map_err(|e| e.to_string())?;
    let (b, _) = train_softmax(&xs, &[0, 2], 3, &cfg).map_err(|e| e.to_string())?;
    ensure!(a == b, "training is not deterministic");
    Ok(format!("gradient relative error <= {worst:.1e}"))
}

fn f1_fuzz() -> Outcome {
    let mut sets = 0;
    for case in 0..500u64 {
        let mut r = rng::indexed(404, case);
        let n = r.random_range(1..=200);
        let gold: Vec<Label> = (0..n).map(|_| Label::ALL[r.random_range(0..3)]).collect();
        let pred: Vec<Label> = (0..n).map(|_| Label::ALL[r.random_range(0..3)]).collect();
        let report = classification_from_labels(&gold, &pred);
        for (i, &l) in Label::ALL.iter().enumerate() {
            let pairs = || gold.iter().zip(&pred);
            let tp = pairs().filter(|(g, p)| **g == l && **p == l).count();
            let fp = pairs().filter(|(g, p)| **g != l && **p == l).count();
            let fn_ = pairs().filter(|(g, p)| **g == l && **p != l).count();
            let denom = 2 * tp + fp + fn_;
            let want = if denom == 0 { 0.0 } else { (2 * tp) as f64 / denom as f64 };
            ensure!(report.per_label[i].f1 == want, "case {case} {l}: {} vs {want}", report.per_label[i].f1);
        }
        ensure!(report.nei_f1 == report.per_label[Label::Nei.index()].f1, "case {case}: NEI-F1 mismatch");
        sets += 1;
    }
    Ok(format!("{sets} fuzzed label sets match exactly"))
}

fn macro_refusal_fuzz() -> Outcome {
    for case in 0..300u64 {
        let mut r = rng::indexed(505, case);
        let n = r.random_range(1..100);
        let only = Label::ALL[r.random_range(0..3)];
        let pred: Vec<Label> = (0..n).map(|_| Label::ALL[r.random_range(0..3)]).collect();
        let report = classification_from_labels(&vec![only; n], &pred);
        ensure!(report.macro_f1().is_err(), "case {case}: Macro-F1 computed on single-label gold");
        let mut mixed = vec![only; n];
        mixed.push(Label::ALL[(only.index() + 1) % 3]);
        let mut pred = pred;
        pred.push(only);
        ensure!(classification_from_labels(&mixed, &pred).macro_f1().is_ok(), "case {case}: two-label gold refused");
    }
    Ok("refusal on 300/300 single-label sets".into())
}

fn coverage_hand_count() -> Outcome {
    let p = |id: &str| PredictionRecord::from_probs(id, "m", 13, [0.2, 0.2, 0.6]);
    // a once, b twice, c and d absent, e not expected: 1 of 4 valid.
    let preds = vec![p("a"), p("b"), p("b"), p("e")];
    let cov = prediction_coverage(["a", "b", "c", "d"], &preds);
    ensure!(cov.n_predicted_valid == 1 && cov.coverage == 0.25, "coverage {} ({} valid)", cov.coverage, cov.n_predicted_valid);
    ensure!(cov.duplicated == ["b"] && cov.missing == ["c", "d"], "duplicated {:?}, missing {:?}", cov.duplicated, cov.missing);
    Ok("coverage 0.25 with b duplicated".into())
}

fn fixed_claim_fixture() -> Outcome {
    use Label::{Refute as R, Support as S};
    // (reference label, reference probs, hard probs)
    let rows: [(Label, [f64; 3], [f64; 3]); 10] = [
        (S, [0.9, 0.05, 0.05], [0.2, 0.1, 0.7]),
        (S, [0.6, 0.3, 0.1], [0.6, 0.3, 0.1]),
        (R, [0.1, 0.8, 0.1], [0.1, 0.3, 0.6]),
        (R, [0.5, 0.4, 0.1], [0.2, 0.2, 0.6]),
        (S, [0.7, 0.2, 0.1], [0.8, 0.1, 0.1]),
        (S, [0.4, 0.1, 0.5], [0.3, 0.1, 0.6]),
        (R, [0.2, 0.7, 0.1], [0.1, 0.5, 0.4]),
        (S, [0.8, 0.1, 0.1], [0.1, 0.1, 0.8]),
        (R, [0.3, 0.6, 0.1], [0.3, 0.7, 0.0]),
        (S, [0.5, 0.25, 0.25], [0.25, 0.5, 0.25]),
    ];
    let mut pairs = Vec::new();
    let mut preds = Vec::new();
    for (i, (y, pr, ph)) in rows.iter().enumerate() {
        let reference = ManifestRecord::new(format!("r{i}"), format!("c{i}"), "claim", vec![EvidenceUnit::text("gold")], *y, ConstructionFamily::Reference);
        let mut hard = nei_record(i, ConstructionFamily::FixedClaim);
        hard.example_id = format!("h{i}");
        hard.validation_status = ValidationStatus::ValidNei;
        hard.adjudicated_label = Some("truly_insufficient".into());
        pairs.push(FixedClaimPair { claim_id: format!("c{i}"), claim: "claim".into(), group_id: format!("c{i}"), reference, hard });
        preds.push(PredictionRecord::from_probs(format!("r{i}"), "m", 13, *pr));
        preds.push(PredictionRecord::from_probs(format!("h{i}"), "m", 13, *ph));
    }
    let r = fixed_claim_diagnostics(&pairs, &preds).map_err(|e| e.to_string())?;
    // Hand enumeration: deltas .7 0 .5 .2 -.1 .1 .2 .7 -.1 .25; drops 7/10;
    // reference correct 8/10; hard NEI 5/10; both 3/10.
    let want = [("mean delta", r.mean_delta, 0.245), ("drop", r.prob_drop_success, 0.7), ("strict", r.strict_swap_success, 0.3), ("hard recall", r.hard_recall, 0.5), ("reference accuracy", r.reference_accuracy, 0.8)];
    for (name, got, want) in want {
        ensure!((got - want).abs() < 1e-12, "{name} {got} vs {want}");
    }
    Ok("10-pair fixture matches hand table".into())
}

fn blinding() -> Outcome {
    use ConstructionFamily::*;
    let mut packets = 0;
    let mut last = None;
    for family in [Placeholder, RandomIrrelevant, PositionBiased, Bm25NearMiss, CitedNonRationale, SameDocument] {
        let mut recs: Vec<ManifestRecord> = synthetic_variant(family)?.into_iter().filter(|r| r.label == Label::Nei).collect();
        recs.iter_mut().for_each(|r| r.validation_status = ValidationStatus::Candidate);
        let (packet, _) = build_audit_packet(&recs, 40.min(recs.len()), 13, &format!("pk-{family}")).map_err(|e| e.to_string())?;
        let leaks = blinding_violations(&packet.to_jsonl());
        ensure!(leaks.is_empty(), "{family} packet leaks {leaks:?}");
        packets += 1;
        last = Some(packet);
    }
    let mut packet = last.expect("at least one packet");
    packet.items.truncate(4);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = ServeConfig {
        packet: packet.clone(),
        sessions: vec![
            SessionSpec { session_id: "s1".into(), annotator_id: "a".into() },
            SessionSpec { session_id: "s2".into(), annotator_id: "b".into() },
        ],
        log_path: dir.path().join("labels.jsonl"),
    };
    let state = AppState::open(config).map_err(|e| e.to_string())?;
    let runtime = tokio::runtime::Builder::new_current_thread().enable_all().build().map_err(|e| e.to_string())?;
    let responses = runtime.block_on(async {
        let mut bodies = Vec::new();
        let call = |method: &str, uri: String, body: Option<serde_json::Value>| {
            let req = Request::builder().method(method).uri(uri);
            let req = match body {
                Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
                None => req.body(Body::empty()),
            }
            .expect("request builds");
            let app = router(Arc::clone(&state));
            async move {
                let resp = app.oneshot(req).await.expect("infallible");
                String::from_utf8(resp.into_body().collect().await.expect("body").to_bytes().to_vec()).expect("UTF-8")
            }
        };
        for (session, judgment, subtype) in [("s1", "truly_insufficient", Some("near_miss")), ("s2", "actually_supported", None)] {
            for item in &packet.items {
                bodies.push(call("GET", format!("/session/{session}/next"), None).await);
                let body = json!({ "item_id": item.item_id, "judgment": judgment, "subtype": subtype });
                bodies.push(call("POST", format!("/session/{session}/label"), Some(body)).await);
            }
            bodies.push(call("GET", format!("/session/{session}/next"), None).await);
        }
        bodies.push(call("GET", "/session/nope/next".into(), None).await);
        bodies.push(call("POST", "/session/s1/label".into(), Some(json!({ "item_id": "zzz", "judgment": "ambiguous" }))).await);
        bodies.push(call("GET", format!("/packet/{}/progress", packet.packet_id), None).await);
        bodies.push(call("GET", format!("/packet/{}/export", packet.packet_id), None).await);
        bodies
    });
    for body in &responses {
        let leaks = blinding_violations(body);
        ensure!(leaks.is_empty(), "serve response leaks {leaks:?}: {body}");
    }
    Ok(format!("{packets} packets and {} serve responses clean", responses.len()))
}

fn release() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let write = |rel: &str, text: &str| -> Result<(), String> {
        let p = root.join(rel);
        std::fs::create_dir_all(p.parent().unwrap()).map_err(|e| e.to_string())?;
        std::fs::write(p, text).map_err(|e| e.to_string())
    };
    let neicap = env!("CARGO_BIN_EXE_neicap");
    let run = |args: &[&str]| -> Result<std::process::Output, String> {
        Command::new(neicap).args(args).current_dir(root).output().map_err(|e| e.to_string())
    };

    // Generated artifacts: a manifest, a one-class table from `neicap eval`,
    // a rendered matrix from `neicap report`, a fixed-claim log.
    let gold: Vec<ManifestRecord> = (0..54).map(|i| nei_record(i, ConstructionFamily::Placeholder)).collect();
    write("manifests/hard.jsonl", &manifest_to_string(&gold))?;
    let preds: String = (0..54)
        .map(|i| serde_json::to_string(&PredictionRecord::from_probs(format!("x{i}"), "m", 13, [0.2, 0.2, 0.6])).unwrap() + "\n")
        .collect();
    write("preds/hard.jsonl", &preds)?;
    let out = run(&["eval", "--gold", "manifests/hard.jsonl", "--preds", "preds/hard.jsonl", "--one-class", "--out", "tables/one_class.csv"])?;
    ensure!(out.status.success(), "eval failed: {}", String::from_utf8_lossy(&out.stderr));
    let refused = run(&["eval", "--gold", "manifests/hard.jsonl", "--preds", "preds/hard.jsonl", "--macro-f1"])?;
    ensure!(refused.status.code() == Some(1), "Macro-F1 on one-class gold exited {:?}", refused.status.code());
    write("runs/cells.csv", "train,eval,seed,accuracy,nei_f1,macro_f1\nplaceholder,placeholder,13,1,1,1\nplaceholder,bm25_near_miss,13,0.5,0,0.4\n")?;
    let out = run(&["report", "--cells", "runs/cells.csv", "--out", "tables"])?;
    ensure!(out.status.success(), "report failed: {}", String::from_utf8_lossy(&out.stderr));
    write("REPORT.md", "# Release report\n")?;
    write("runs/registry.jsonl", "{\"run\":\"probe\"}\n")?;

    let mut decl = WorkspaceDecl {
        key_reports: vec!["REPORT.md".into()],
        tables: vec!["tables/matrix.csv".into()],
        one_class_tables: vec!["tables/one_class.csv".into()],
        manifests: vec!["manifests/hard.jsonl".into()],
        fixed_claim: vec![neicap::report::FixedClaimInput { manifest: "manifests/hard.jsonl".into(), predictions: vec!["preds/hard.jsonl".into()] }],
        registry: vec!["runs/registry.jsonl".into()],
        unavailable: vec![UnavailableCase { case: "transformer verifiers".into(), reason: "no GPU training in scope".into() }],
        ..Default::default()
    };
    let locked = ["tables/matrix.csv".to_string(), "tables/one_class.csv".to_string()];
    decl.locks = lock_files(root, &locked).map_err(|e| e.to_string())?;
    write(WORKSPACE_FILE, &decl.to_toml())?;

    let pristine = release_audit(root).map_err(|e| e.to_string())?;
    ensure!(pristine.passed(), "pristine workspace failed: {}", pristine.to_jsonl());
    let cli = run(&["release-audit", "--workspace", "."])?;
    ensure!(cli.status.success(), "release-audit exited {:?} on a pristine workspace", cli.status.code());

    // Macro-F1 column injected into the one-class table.
    let original = std::fs::read_to_string(root.join("tables/one_class.csv")).map_err(|e| e.to_string())?;
    let injected: String = original
        .lines()
        .enumerate()
        .map(|(i, l)| if i == 0 { format!("{l},macro_f1\n") } else { format!("{l},0.5\n") })
        .collect();
    write("tables/one_class.csv", &injected)?;
    let report = release_audit(root).map_err(|e| e.to_string())?;
    let c = report.get("no_macro_f1_on_one_class").ok_or("check missing")?;
    ensure!(!c.passed && c.critical, "Macro-F1 injection not caught: {}", report.to_jsonl());
    let cli = run(&["release-audit", "--workspace", "."])?;
    ensure!(cli.status.code() == Some(1), "release-audit exited {:?} after injection", cli.status.code());
    write("tables/one_class.csv", &original)?;

    // One byte of a locked artifact flipped.
    let path = root.join("tables/matrix.csv");
    let mut bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
    let last = bytes.len() - 2;
    bytes[last] ^= 0x01;
    std::fs::write(&path, bytes).map_err(|e| e.to_string())?;
    let report = release_audit(root).map_err(|e| e.to_string())?;
    let c = report.get("locked_outputs_unchanged").ok_or("check missing")?;
    ensure!(!c.passed && c.critical && c.detail.contains("tables/matrix.csv"), "byte flip not caught: {}", c.detail);
    ensure!(report.critical_failures().len() == 1, "byte flip tripped other checks: {}", report.to_jsonl());
    Ok(format!("pristine passes {} checks; Macro-F1 injection and byte flip both critical", pristine.checks.len()))
}
