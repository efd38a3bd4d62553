use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use neicap::manifest::{read_manifest, Label, Split, ValidationStatus};
use neicap::metrics::PredictionRecord;
use neicap::report::ProvenanceStamp;
use serde_json::json;

fn neicap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neicap")).args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = neicap(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn sample_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample")
}

fn write_preds(path: &Path, ids: impl IntoIterator<Item = String>, probs: [f64; 3]) {
    let text: String = ids
        .into_iter()
        .map(|id| serde_json::to_string(&PredictionRecord::from_probs(id, "m", 13, probs)).unwrap() + "\n")
        .collect();
    std::fs::write(path, text).unwrap();
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = neicap(dir.path(), &["eval", "--gold", "g", "--preds", "p", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = neicap(dir.path(), &["split", "--manifest", "m", "--out", "o", "--ratios", "0.5,0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = neicap(dir.path(), &["construct", "--corpus", "c", "--family", "made_up", "--out", "o"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = neicap(dir.path(), &["eval", "--gold", "nope.jsonl", "--preds", "nope.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.jsonl"));
}

#[test]
fn one_class_eval_and_macro_refusal() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gold: Vec<_> = read_manifest(sample_dir().join("placeholder.jsonl"))
        .unwrap()
        .into_iter()
        .filter(|r| r.label == Label::Nei && r.split == Split::Test)
        .collect();
    std::fs::write(d.join("gold.jsonl"), neicap::manifest::manifest_to_string(&gold)).unwrap();
    write_preds(&d.join("preds.jsonl"), gold.iter().map(|r| r.example_id.clone()), [0.7, 0.2, 0.1]);

    let out = ok(d, &["eval", "--gold", "gold.jsonl", "--preds", "preds.jsonl", "--one-class"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("metric,value,low,high\nn,61,,\nnei_recall,0,,\nfalse_support_rate,1,,\n"), "{csv}");
    assert!(!csv.contains("macro"));

    let out = neicap(d, &["eval", "--gold", "gold.jsonl", "--preds", "preds.jsonl", "--macro-f1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Macro-F1 refused"));

    ok(d, &["eval", "--gold", "gold.jsonl", "--preds", "preds.jsonl", "--one-class", "--bootstrap", "groups", "--out", "oc.csv"]);
    let table = std::fs::read_to_string(d.join("oc.csv")).unwrap();
    assert!(table.lines().nth(2).unwrap().starts_with("nei_recall,0,0,0"), "{table}");
    assert!(d.join("oc.csv.provenance.json").is_file());
}

#[test]
fn construct_stamp_reruns_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = sample_dir();
    let corpus = corpus.to_str().unwrap();
    ok(d, &["construct", "--corpus", corpus, "--family", "cited_non_rationale", "--seed", "17", "--out", "a.jsonl"]);
    let stamp: ProvenanceStamp =
        serde_json::from_str(&std::fs::read_to_string(d.join("a.jsonl.provenance.json")).unwrap()).unwrap();
    assert_eq!(stamp.command, "construct");
    assert_eq!(stamp.seed, Some(17));
    assert_eq!(stamp.inputs.len(), 2);
    assert_eq!(stamp.config["family"], "cited_non_rationale");

    let mut argv: Vec<String> = stamp.argv[1..].to_vec();
    let last = argv.len() - 1;
    argv[last] = "b.jsonl".into();
    let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
    ok(d, &argv);
    assert_eq!(std::fs::read(d.join("a.jsonl")).unwrap(), std::fs::read(d.join("b.jsonl")).unwrap());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c.toml"), "family = \"placeholder\"\nrng_seed = 5\nplaceholder_marker = \"NO EVIDENCE\"\n").unwrap();
    let corpus = sample_dir();
    ok(d, &["construct", "--corpus", corpus.to_str().unwrap(), "--config", "c.toml", "--seed", "9", "--out", "m.jsonl"]);
    let stamp: ProvenanceStamp =
        serde_json::from_str(&std::fs::read_to_string(d.join("m.jsonl.provenance.json")).unwrap()).unwrap();
    assert_eq!(stamp.seed, Some(9));
    assert_eq!(stamp.inputs.len(), 3);
}

#[test]
fn shipped_sample_is_current() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["sample", "--out", "s"]);
    for f in ["documents.jsonl", "claims.jsonl", "multihop.jsonl"] {
        assert_eq!(std::fs::read(dir.path().join("s").join(f)).unwrap(), std::fs::read(sample_dir().join(f)).unwrap(), "{f}");
    }
    let records = read_manifest(sample_dir().join("placeholder.jsonl")).unwrap();
    let test: Vec<_> = records.iter().filter(|r| r.split == Split::Test).collect();
    let count = |l| test.iter().filter(|r| r.label == l).count();
    assert_eq!((test.len(), count(Label::Support), count(Label::Refute), count(Label::Nei)), (177, 76, 40, 61));
}

#[test]
fn split_assigns_whole_groups() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let m = sample_dir().join("placeholder.jsonl");
    ok(d, &["split", "--manifest", m.to_str().unwrap(), "--ratios", "0.7,0.15,0.15", "--out", "split.tsv", "--apply", "split.jsonl"]);
    let tsv = std::fs::read_to_string(d.join("split.tsv")).unwrap();
    assert_eq!(tsv.lines().filter(|l| !l.is_empty()).count(), 257);
    let out = ok(d, &["audit", "--manifest", "split.jsonl", "--out", "audit"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("leakage: clean"));
}

#[test]
fn audit_writes_all_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let s = sample_dir();
    let (p, b) = (s.join("placeholder.jsonl"), s.join("bm25_near_miss.jsonl"));
    ok(d, &[
        "audit", "--manifest", p.to_str().unwrap(), "--manifest", b.to_str().unwrap(), "--corpus", s.to_str().unwrap(),
        "--separability", "placeholder,bm25_near_miss", "--out", "audit",
    ]);
    for f in ["split_stats.csv", "leakage.csv", "family_summary.csv", "violations.csv", "separability.csv", "provenance.json"] {
        assert!(d.join("audit").join(f).is_file(), "{f}");
    }
    let sep = std::fs::read_to_string(d.join("audit/separability.csv")).unwrap();
    assert!(sep.contains("placeholder_vs_bm25_near_miss,1.000"), "{sep}");
    let violations = std::fs::read_to_string(d.join("audit/violations.csv")).unwrap();
    assert_eq!(violations.lines().count(), 1, "{violations}");
}

#[test]
fn probe_and_report_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let s = sample_dir();
    let p = format!("placeholder={}", s.join("placeholder.jsonl").display());
    let b = format!("bm25_near_miss={}", s.join("bm25_near_miss.jsonl").display());
    ok(d, &["probe", "matrix", "--variant", &p, "--variant", &b, "--seeds", "13,17", "--out", "probe"]);
    let cells = std::fs::read_to_string(d.join("probe/cells.csv")).unwrap();
    assert_eq!(cells.lines().count(), 1 + 2 * 2 * 2);
    assert_eq!(std::fs::read_dir(d.join("probe/preds")).unwrap().count(), 8);
    ok(d, &["report", "--cells", "probe/cells.csv", "--out", "report"]);
    assert_eq!(
        std::fs::read_to_string(d.join("probe/matrix.csv")).unwrap(),
        std::fs::read_to_string(d.join("report/matrix.csv")).unwrap()
    );
    assert!(d.join("report/drop_summary.csv").is_file() || !cells.contains("cited_non_rationale"));
}

fn annotate(path: &Path, items: &[String], annotator: &str, pick: impl Fn(usize) -> (&'static str, Option<&'static str>)) {
    let text: String = items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let (judgment, subtype) = pick(i);
            json!({ "item_id": item, "annotator_id": annotator, "judgment": judgment, "subtype": subtype }).to_string() + "\n"
        })
        .collect();
    std::fs::write(path, text).unwrap();
}

#[test]
fn validation_workflow_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let s = sample_dir();
    let s = s.to_str().unwrap();
    ok(d, &["construct", "--corpus", s, "--family", "bm25_near_miss", "--slots", "gold", "--candidates", "--out", "cand.jsonl"]);
    ok(d, &["validate-sample", "--candidates", "cand.jsonl", "--n", "30", "--packet-id", "p1", "--out", "pk"]);
    let packet = std::fs::read_to_string(d.join("pk/packet.jsonl")).unwrap();
    assert!(neicap::validate::blinding_violations(&packet).is_empty());
    let items: Vec<String> = packet
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["item_id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(items.len(), 30);

    let a = |i: usize| if i % 5 == 0 { ("actually_supported", None) } else { ("truly_insufficient", Some("near_miss")) };
    let b = |i: usize| if i == 1 { ("ambiguous", None) } else { a(i) };
    annotate(&d.join("a.jsonl"), &items, "a", a);
    annotate(&d.join("b.jsonl"), &items, "b", b);
    let out = neicap(d, &["validate-merge", "--a", "a.jsonl", "--b", "b.jsonl", "--out", "m"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(d.join("m/disagreements.jsonl").is_file());

    annotate(&d.join("res.jsonl"), &items[1..2], "consensus", |_| ("truly_insufficient", Some("partial")));
    ok(d, &["validate-merge", "--a", "a.jsonl", "--b", "b.jsonl", "--resolutions", "res.jsonl", "--out", "m"]);
    let validity = std::fs::read_to_string(d.join("m/validity.csv")).unwrap();
    assert!(validity.contains("valid_nei,0.800"), "{validity}");

    ok(d, &[
        "derive-hard", "--a", "a.jsonl", "--b", "b.jsonl", "--resolutions", "res.jsonl", "--key", "pk/key.json",
        "--candidates", "cand.jsonl", "--out", "hard",
    ]);
    let hard = read_manifest(d.join("hard/hard.jsonl")).unwrap();
    assert_eq!(hard.len(), 24);
    assert!(hard.iter().all(|r| r.validation_status == ValidationStatus::ValidNei));

    let reference = format!("{s}/bm25_near_miss.jsonl");
    ok(d, &["fixed-claim", "--reference", &reference, "--hard", "hard/hard.jsonl", "--out", "fc"]);
    let pairs = read_manifest(d.join("fc/pairs.jsonl")).unwrap();
    assert_eq!(pairs.len(), 48);
    write_preds(&d.join("fc_preds.jsonl"), pairs.iter().skip(1).map(|r| r.example_id.clone()), [0.1, 0.1, 0.8]);
    let out = neicap(d, &["fixed-claim", "--reference", &reference, "--hard", "hard/hard.jsonl", "--preds", "fc_preds.jsonl", "--out", "fc"]);
    assert_eq!(out.status.code(), Some(1), "incomplete coverage must fail");
    write_preds(&d.join("fc_preds.jsonl"), pairs.iter().map(|r| r.example_id.clone()), [0.1, 0.1, 0.8]);
    ok(d, &["fixed-claim", "--reference", &reference, "--hard", "hard/hard.jsonl", "--preds", "fc_preds.jsonl", "--out", "fc"]);
    let summary = std::fs::read_to_string(d.join("fc/fixed_claim.csv")).unwrap();
    assert!(summary.contains("n_pairs,24"), "{summary}");
}

#[test]
fn release_audit_reads_workspace_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("neicap-workspace.toml"), "key_reports = [\"missing.md\"]\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_neicap"))
        .arg("release-audit")
        .env("NEICAP_WORKSPACE", d)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let lines = String::from_utf8(out.stdout).unwrap();
    assert!(lines.lines().next().unwrap().contains("\"check\":\"key_reports_exist\""), "{lines}");
    std::fs::write(d.join("missing.md"), "x").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_neicap")).arg("release-audit").env("NEICAP_WORKSPACE", d).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn missing_hop_is_candidate_only() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mh = sample_dir().join("multihop.jsonl");
    ok(d, &["construct", "--family", "missing_hop", "--multihop", mh.to_str().unwrap(), "--out", "mh.jsonl"]);
    let recs = read_manifest(d.join("mh.jsonl")).unwrap();
    assert_eq!(recs.len(), 40);
    assert!(recs.iter().all(|r| r.validation_status == ValidationStatus::Candidate));
    let out = neicap(d, &["construct", "--family", "fixed_claim", "--corpus", ".", "--out", "x.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
}
