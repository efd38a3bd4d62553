use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use neicap::audit::{audit_summary, separability_probe, shallow_features, FamilySummary, Lexicons, SeparabilityConfig, SeparabilityResult};
use neicap::construct::{
    construct_nei, construct_variant, make_fixed_claim_pairs, make_missing_hop, parse_multihop, ConstructionConfig,
};
use neicap::manifest::{
    group_disjoint_split, leakage_audit, manifest_to_string, read_manifest, split_statistics, validate_against_corpus,
    validate_manifest, ConstructionFamily, Corpus, Label, ManifestRecord, SplitRatios, SplitStats, ValidationStatus,
};
use neicap::metrics::{
    classification_metrics, drop_summary, fixed_claim_diagnostics, one_class_metrics, read_predictions,
    write_predictions, BootstrapConfig, Interval, ResampleMode,
};
use neicap::probe::{run_construction_matrix, MatrixConfig, Variant};
use neicap::report::{mean_matrix, parse_cells_csv, release_audit, render_matrix, MatrixCellRow, ProvenanceStamp};
use neicap::synthetic::{synthetic_corpus, synthetic_multihop, SyntheticConfig};
use neicap::validate::{
    blinding_violations, build_audit_packet, derive_hard_subset, merge_consensus, parse_annotations, validity_rates,
    AdjudicationRecord, AuditPacket, ConsensusOutcome, PacketKey,
};
use neicap_serve::ServeConfig;
use serde::Serialize;

use crate::args::*;
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

const MULTIHOP_SAMPLE_SIZE: usize = 40;

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sample(a) => sample(a),
        Command::Construct(a) => construct(a),
        Command::Split(a) => split(a),
        Command::Audit(a) => audit(a),
        Command::Probe(ProbeCommand::Matrix(a)) => probe_matrix(a),
        Command::Eval(a) => eval(a),
        Command::FixedClaim(a) => fixed_claim(a),
        Command::ValidateSample(a) => validate_sample(a),
        Command::ValidateMerge(a) => validate_merge(a),
        Command::DeriveHard(a) => derive_hard(a),
        Command::Report(a) => report(a),
        Command::ReleaseAudit(a) => release(a),
        Command::Serve(a) => serve(a),
    }
    .map(|()| ExitCode::SUCCESS)
}

/// Collects inputs and outputs of one run and writes the provenance stamp.
struct Run {
    stamp: ProvenanceStamp,
}

impl Run {
    fn new(command: &str) -> Self {
        let argv = std::iter::once("neicap".to_string()).chain(std::env::args().skip(1)).collect();
        Run { stamp: ProvenanceStamp::new(command, argv) }
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.stamp.input(path).map_err(|e| io_err(path, e))
    }

    fn config(&mut self, config: &impl Serialize, seed: Option<u64>) {
        self.stamp.config = serde_json::to_value(config).expect("config serializes");
        self.stamp.seed = seed;
    }

    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        fs::write(path, contents).map_err(|e| io_err(path, e))?;
        self.stamp.outputs.push(path.to_path_buf());
        Ok(())
    }

    /// Stamp for a single-file output, written as `<file>.provenance.json`.
    fn finish_file(self, out: &Path) -> Result<()> {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".provenance.json");
        let path = out.with_file_name(name);
        self.stamp.write(&path).map_err(|e| io_err(&path, e))
    }

    /// Stamp for a directory of outputs, written as `<dir>/provenance.json`.
    fn finish_dir(self, dir: &Path) -> Result<()> {
        let path = dir.join("provenance.json");
        self.stamp.write(&path).map_err(|e| io_err(&path, e))
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn load_manifest(run: &mut Run, path: &Path) -> Result<Vec<ManifestRecord>> {
    run.input(path)?;
    read_manifest(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_annotations(run: &mut Run, path: &Path) -> Result<Vec<AdjudicationRecord>> {
    run.input(path)?;
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    parse_annotations(BufReader::new(file)).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load_corpus(run: &mut Run, dir: &Path) -> Result<Corpus> {
    run.input(&dir.join("documents.jsonl"))?;
    run.input(&dir.join("claims.jsonl"))?;
    Corpus::load_dir(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

fn jsonl<T: Serialize>(items: &[T]) -> String {
    items.iter().map(|x| serde_json::to_string(x).expect("serializes") + "\n").collect()
}

fn csv_string<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn interval_row(name: &str, i: &Interval) -> Vec<String> {
    vec![name.to_string(), i.estimate.to_string(), i.low.to_string(), i.high.to_string()]
}

fn sample(a: SampleArgs) -> Result<()> {
    let mut run = Run::new("sample");
    let cfg = SyntheticConfig { seed: a.seed, ..SyntheticConfig::default() };
    let corpus = synthetic_corpus(&cfg);
    run.write(&a.out.join("documents.jsonl"), &corpus.documents_jsonl())?;
    run.write(&a.out.join("claims.jsonl"), &corpus.claims_jsonl())?;
    run.write(&a.out.join("multihop.jsonl"), &jsonl(&synthetic_multihop(MULTIHOP_SAMPLE_SIZE, a.seed)))?;
    run.config(&cfg, Some(a.seed));
    run.finish_dir(&a.out)
}

fn construct(a: ConstructArgs) -> Result<()> {
    let mut run = Run::new("construct");
    let mut cfg = match &a.config {
        Some(path) => {
            run.input(path)?;
            ConstructionConfig::from_toml(&read_text(path)?)?
        }
        None => ConstructionConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.rng_seed = seed;
    }
    if a.family.is_some() {
        cfg.family = a.family;
    }
    cfg.check()?;
    let family = cfg.family.ok_or_else(|| CliError::Usage("no family: pass --family or set `family` in the config".into()))?;
    let mut records = match family {
        ConstructionFamily::MissingHop => {
            let path = a.multihop.as_ref().ok_or_else(|| CliError::Usage("missing_hop needs --multihop".into()))?;
            run.input(path)?;
            let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
            make_missing_hop(&parse_multihop(BufReader::new(file))?, &cfg)?
        }
        ConstructionFamily::FixedClaim => {
            return Err(CliError::Usage("fixed_claim pairs are built by `neicap fixed-claim` from adjudicated records".into()))
        }
        ConstructionFamily::Reference => {
            return Err(CliError::Usage("reference is not an NEI family".into()));
        }
        _ => {
            let dir = a.corpus.as_ref().ok_or_else(|| CliError::Usage(format!("{family} needs --corpus")))?;
            let corpus = load_corpus(&mut run, dir)?;
            match a.slots {
                Slots::Nei => construct_variant(&corpus, family, &cfg)?,
                Slots::Gold => {
                    let gold: Vec<_> = corpus.claims.values().filter(|c| c.label != Label::Nei).collect();
                    construct_nei(&corpus, &gold, family, &cfg)?
                }
            }
        }
    };
    if a.candidates {
        for r in records.iter_mut().filter(|r| r.label == Label::Nei) {
            r.validation_status = ValidationStatus::Candidate;
        }
    }
    let violations = validate_manifest(&records);
    if let Some(v) = violations.first() {
        return Err(CliError::Data(format!("constructed manifest has {} violations, first: {v}", violations.len())));
    }
    run.write(&a.out, &manifest_to_string(&records))?;
    run.config(&cfg, Some(cfg.rng_seed));
    eprintln!("{}: {} records ({} NEI)", a.out.display(), records.len(), records.iter().filter(|r| r.label == Label::Nei).count());
    run.finish_file(&a.out)
}

fn split(a: SplitArgs) -> Result<()> {
    let mut run = Run::new("split");
    let [train, dev, test] = a.ratios[..] else {
        return Err(CliError::Usage(format!("--ratios takes three values, got {}", a.ratios.len())));
    };
    let ratios = SplitRatios::new(train, dev, test).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut records = load_manifest(&mut run, &a.manifest)?;
    let assignment = group_disjoint_split(&records, ratios, a.seed)?;
    run.write(&a.out, &assignment.to_tsv())?;
    if let Some(path) = &a.apply {
        assignment.apply(&mut records);
        run.write(path, &manifest_to_string(&records))?;
    }
    let [n_train, n_dev, n_test] = assignment.example_counts(&records);
    eprintln!("examples: train {n_train}, dev {n_dev}, test {n_test}");
    run.config(&ratios.as_array(), Some(a.seed));
    run.finish_file(&a.out)
}

fn audit(a: AuditArgs) -> Result<()> {
    let mut run = Run::new("audit");
    let lex = Lexicons::default();
    let corpus = match &a.corpus {
        Some(dir) => Some(load_corpus(&mut run, dir)?),
        None => None,
    };
    let mut named = Vec::new();
    for path in &a.manifests {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        if named.iter().any(|(n, _)| *n == name) {
            return Err(CliError::Usage(format!("two manifests share the variant name {name:?}")));
        }
        named.push((name, load_manifest(&mut run, path)?));
    }

    let stats: Vec<SplitStats> = named.iter().flat_map(|(n, recs)| split_statistics(n, recs, &lex)).collect();
    run.write(&a.out.join("split_stats.csv"), &SplitStats::to_csv(&stats))?;

    let leakage = leakage_audit(&named);
    run.write(&a.out.join("leakage.csv"), &leakage.to_csv())?;

    let all: Vec<ManifestRecord> = named.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
    let features: Vec<_> = all.iter().map(|r| shallow_features(r, &lex)).collect();
    run.write(&a.out.join("family_summary.csv"), &FamilySummary::to_csv(&audit_summary(&all, &features)))?;

    let mut violations = Vec::new();
    for (name, recs) in &named {
        let mut v = validate_manifest(recs);
        if let Some(c) = &corpus {
            v.extend(validate_against_corpus(recs, c));
        }
        violations.extend(v.into_iter().map(|v| vec![name.clone(), v.example_id, v.rule.to_string(), v.detail]));
    }
    let n_violations = violations.len();
    run.write(&a.out.join("violations.csv"), &csv_string(&["variant", "example_id", "rule", "detail"], violations)?)?;

    let mut sep_cfg = SeparabilityConfig::default();
    sep_cfg.train.seed = a.seed;
    if !a.separability.is_empty() {
        let pool = |f: ConstructionFamily| -> Vec<Vec<f64>> {
            all.iter()
                .zip(&features)
                .filter(|(r, _)| r.label == Label::Nei && r.construction == f)
                .map(|(_, x)| x.to_dense())
                .collect()
        };
        let mut rows = Vec::new();
        for &(fa, fb) in &a.separability {
            let res: SeparabilityResult = separability_probe(&pool(fa), &pool(fb), &sep_cfg)?;
            rows.push(res.csv_row(&format!("{fa}_vs_{fb}")));
        }
        run.write(&a.out.join("separability.csv"), &csv_string(&SeparabilityResult::CSV_HEADER, rows)?)?;
    }

    eprintln!(
        "leakage: {}; violations: {n_violations}",
        if leakage.is_clean() { "clean" } else { "LEAKS FOUND (see leakage.csv)" }
    );
    run.config(&serde_json::json!({ "lexicons": lex, "separability": sep_cfg }), Some(a.seed));
    run.finish_dir(&a.out)
}

fn probe_matrix(a: ProbeArgs) -> Result<()> {
    let mut run = Run::new("probe matrix");
    let mut variants = Vec::new();
    for (family, path) in &a.variants {
        variants.push(Variant::from_records(*family, &load_manifest(&mut run, path)?));
    }
    let mut cfg = MatrixConfig { spec: a.spec, seeds: a.seeds.clone(), ..MatrixConfig::default() };
    if let Some(w) = a.workers {
        cfg.workers = w.max(1);
    }
    let result = run_construction_matrix(&variants, &cfg)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    for c in &result.cells {
        w.serialize(MatrixCellRow {
            train: c.train.to_string(),
            eval: c.eval.to_string(),
            seed: c.seed,
            accuracy: c.accuracy,
            nei_f1: c.nei_f1,
            macro_f1: c.macro_f1,
        })?;
    }
    let cells = String::from_utf8(w.into_inner().map_err(|e| CliError::Data(e.to_string()))?).expect("UTF-8");
    run.write(&a.out.join("cells.csv"), &cells)?;

    let summary = result.aggregate().into_iter().map(|s| {
        let f = s.nei_f1;
        vec![s.train.to_string(), s.eval.to_string(), f.n.to_string(), f.mean.to_string(), f.sd.to_string(), f.min.to_string(), f.max.to_string()]
    });
    run.write(
        &a.out.join("summary.csv"),
        &csv_string(&["train", "eval", "n_seeds", "nei_f1_mean", "nei_f1_sd", "nei_f1_min", "nei_f1_max"], summary)?,
    )?;

    for ((train, eval, seed), preds) in &result.logs {
        let mut buf = Vec::new();
        write_predictions(preds, &mut buf).expect("writing to a Vec cannot fail");
        let path = a.out.join("preds").join(format!("{train}__{eval}__seed{seed}.jsonl"));
        run.write(&path, &String::from_utf8(buf).expect("UTF-8"))?;
    }

    let table = render_matrix(&result.nei_f1_matrix())?;
    run.write(&a.out.join("matrix.txt"), &table.to_text())?;
    run.write(&a.out.join("matrix.csv"), &table.to_csv())?;
    print!("{}", table.to_text());
    run.config(
        &serde_json::json!({ "spec": cfg.spec.as_str(), "seeds": cfg.seeds, "features": cfg.features, "train": cfg.train }),
        None,
    );
    run.finish_dir(&a.out)
}

fn eval(a: EvalArgs) -> Result<()> {
    let mut run = Run::new("eval");
    let gold = load_manifest(&mut run, &a.gold)?;
    run.input(&a.preds)?;
    let preds = read_predictions(&a.preds).map_err(|e| CliError::Data(format!("{}: {e}", a.preds.display())))?;
    let boot = BootstrapConfig { replicates: a.replicates, seed: a.seed, ..BootstrapConfig::default() };
    let header = ["metric", "value", "low", "high"];
    let csv = if a.one_class {
        let mode = a.bootstrap.map(|m| match m {
            Resample::Examples => ResampleMode::Examples,
            Resample::Groups => ResampleMode::Groups,
        });
        let r = one_class_metrics(&gold, &preds, mode.as_ref().map(|m| (&boot, *m)))?;
        let ci = |name: &str, v: f64, i: Option<&Interval>| match i {
            Some(i) => interval_row(name, i),
            None => vec![name.to_string(), v.to_string(), String::new(), String::new()],
        };
        let iv = r.intervals.as_ref();
        let rows = vec![
            vec!["n".to_string(), r.n.to_string(), String::new(), String::new()],
            ci("nei_recall", r.nei_recall, iv.map(|i| &i.nei_recall)),
            ci("false_support_rate", r.false_support_rate, iv.map(|i| &i.false_support_rate)),
            ci("false_refute_rate", r.false_refute_rate, iv.map(|i| &i.false_refute_rate)),
            ci("mean_p_nei", r.mean_p_nei, None),
            ci("mean_p_support", r.mean_p_support, None),
            ci("mean_p_refute", r.mean_p_refute, None),
        ];
        run.config(&serde_json::json!({ "one_class": true, "bootstrap": mode.map(|m| (boot, m.as_str())) }), Some(a.seed));
        csv_string(&header, rows)?
    } else {
        if a.bootstrap.is_some() {
            return Err(CliError::Usage("--bootstrap applies to --one-class reports".into()));
        }
        let r = classification_metrics(&gold, &preds)?;
        let macro_f1 = match r.macro_f1() {
            Ok(v) => Some(v),
            Err(e) if a.macro_f1 => return Err(e.into()),
            Err(e) => {
                eprintln!("note: {e}");
                None
            }
        };
        let plain = |name: String, v: String| vec![name, v, String::new(), String::new()];
        let mut rows = vec![
            plain("n".into(), r.n.to_string()),
            plain("accuracy".into(), r.accuracy.to_string()),
            plain("nei_f1".into(), r.nei_f1.to_string()),
        ];
        if let Some(m) = macro_f1 {
            rows.push(plain("macro_f1".into(), m.to_string()));
        }
        for (label, s) in Label::ALL.iter().zip(&r.per_label) {
            rows.push(plain(format!("{label}_precision"), s.precision.to_string()));
            rows.push(plain(format!("{label}_recall"), s.recall.to_string()));
            rows.push(plain(format!("{label}_f1"), s.f1.to_string()));
        }
        run.config(&serde_json::json!({ "one_class": false, "macro_f1_required": a.macro_f1 }), None);
        csv_string(&header, rows)?
    };
    match &a.out {
        Some(out) => {
            run.write(out, &csv)?;
            run.finish_file(out)
        }
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn fixed_claim(a: FixedClaimArgs) -> Result<()> {
    let mut run = Run::new("fixed-claim");
    let reference: Vec<ManifestRecord> =
        load_manifest(&mut run, &a.reference)?.into_iter().filter(|r| r.label != Label::Nei).collect();
    let hard: Vec<ManifestRecord> =
        load_manifest(&mut run, &a.hard)?.into_iter().filter(|r| r.label == Label::Nei).collect();
    let pairs = make_fixed_claim_pairs(&reference, &hard)?;
    run.write(&a.out.join("pairs.jsonl"), &manifest_to_string(&pairs.records()))?;
    let unpaired = pairs.unpaired.iter().map(|u| vec![u.example_id.clone(), u.claim_id.clone(), u.side.to_string()]);
    run.write(&a.out.join("unpaired.csv"), &csv_string(&["example_id", "claim_id", "side"], unpaired)?)?;
    eprintln!("{} pairs, {} unpaired records", pairs.pairs.len(), pairs.unpaired.len());
    if let Some(path) = &a.preds {
        run.input(path)?;
        let preds = read_predictions(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let r = fixed_claim_diagnostics(&pairs.pairs, &preds)?;
        let rows = [
            ("n_pairs", r.n_pairs as f64),
            ("mean_delta", r.mean_delta),
            ("prob_drop_success", r.prob_drop_success),
            ("strict_swap_success", r.strict_swap_success),
            ("hard_recall", r.hard_recall),
            ("reference_accuracy", r.reference_accuracy),
        ]
        .map(|(k, v)| vec![k.to_string(), v.to_string()]);
        run.write(&a.out.join("fixed_claim.csv"), &csv_string(&["metric", "value"], rows)?)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        for p in &r.pairs {
            w.serialize(p)?;
        }
        let outcomes = String::from_utf8(w.into_inner().map_err(|e| CliError::Data(e.to_string()))?).expect("UTF-8");
        run.write(&a.out.join("pair_outcomes.csv"), &outcomes)?;
        eprintln!("mean delta {:.3}, drop success {:.3}", r.mean_delta, r.prob_drop_success);
    }
    run.finish_dir(&a.out)
}

fn validate_sample(a: ValidateSampleArgs) -> Result<()> {
    let mut run = Run::new("validate-sample");
    let candidates: Vec<ManifestRecord> = load_manifest(&mut run, &a.candidates)?
        .into_iter()
        .filter(|r| r.validation_status == ValidationStatus::Candidate)
        .collect();
    if candidates.is_empty() {
        return Err(CliError::Data(format!("{} holds no candidate records", a.candidates.display())));
    }
    let (packet, key) = build_audit_packet(&candidates, a.n, a.seed, &a.packet_id)?;
    let text = packet.to_jsonl();
    let leaks = blinding_violations(&text);
    if !leaks.is_empty() {
        return Err(CliError::Data(format!("packet is not blind: {}", leaks.join(", "))));
    }
    run.write(&a.out.join("packet.jsonl"), &text)?;
    run.write(&a.out.join("key.json"), &(serde_json::to_string_pretty(&key).expect("key serializes") + "\n"))?;
    run.config(&serde_json::json!({ "n": a.n, "packet_id": a.packet_id }), Some(a.seed));
    run.finish_dir(&a.out)
}

fn merged(run: &mut Run, a: &Path, b: &Path, resolutions: Option<&PathBuf>) -> Result<ConsensusOutcome> {
    let ra = load_annotations(run, a)?;
    let rb = load_annotations(run, b)?;
    let rr = match resolutions {
        Some(p) => load_annotations(run, p)?,
        None => Vec::new(),
    };
    Ok(merge_consensus(&ra, &rb, &rr)?)
}

fn validate_merge(a: MergeArgs) -> Result<()> {
    let mut run = Run::new("validate-merge");
    let outcome = merged(&mut run, &a.a, &a.b, a.resolutions.as_ref())?;
    run.write(&a.out.join("disagreements.jsonl"), &jsonl(&outcome.disagreements))?;
    let agreement = [
        vec!["n_items".to_string(), outcome.n_items.to_string()],
        vec!["raw_agreement".into(), outcome.raw_agreement.to_string()],
        vec!["label_agreement".into(), outcome.label_agreement.to_string()],
        vec!["binary_agreement".into(), outcome.binary_agreement.to_string()],
        vec!["n_disagreements".into(), outcome.disagreements.len().to_string()],
        vec!["n_unresolved".into(), outcome.unresolved.len().to_string()],
    ];
    run.write(&a.out.join("agreement.csv"), &csv_string(&["metric", "value"], agreement)?)?;
    let boot = BootstrapConfig { replicates: a.replicates, seed: a.seed, ..BootstrapConfig::default() };
    run.config(&boot, Some(a.seed));
    if !outcome.unresolved.is_empty() {
        let n = outcome.unresolved.len();
        run.finish_dir(&a.out)?;
        return Err(CliError::Data(format!(
            "{n} disagreements have no consensus resolution; see disagreements.jsonl and pass --resolutions"
        )));
    }
    run.write(&a.out.join("final.jsonl"), &jsonl(&outcome.finals))?;
    let summary = validity_rates(&outcome, &boot)?;
    run.write(&a.out.join("validity.csv"), &summary.to_csv())?;
    eprintln!(
        "{} audited, valid NEI rate {:.3} [{:.3}, {:.3}]",
        summary.n_audited, summary.valid_nei_rate.estimate, summary.valid_nei_rate.low, summary.valid_nei_rate.high
    );
    run.finish_dir(&a.out)
}

fn derive_hard(a: DeriveHardArgs) -> Result<()> {
    let mut run = Run::new("derive-hard");
    if !(a.test_ratio > 0.0 && a.test_ratio < 1.0) {
        return Err(CliError::Usage(format!("--test-ratio {} is outside (0, 1)", a.test_ratio)));
    }
    let outcome = merged(&mut run, &a.a, &a.b, a.resolutions.as_ref())?;
    run.input(&a.key)?;
    let key: PacketKey = serde_json::from_str(&read_text(&a.key)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", a.key.display())))?;
    let candidates = load_manifest(&mut run, &a.candidates)?;
    let subset = derive_hard_subset(&outcome, &key, &candidates, a.test_ratio, a.seed)?;
    run.write(&a.out.join("hard.jsonl"), &manifest_to_string(&subset.hard))?;
    run.write(&a.out.join("hard_test.jsonl"), &manifest_to_string(&subset.test))?;
    eprintln!("{} hard records, {} held out", subset.hard.len(), subset.test.len());
    run.config(&serde_json::json!({ "test_ratio": a.test_ratio }), Some(a.seed));
    run.finish_dir(&a.out)
}

fn report(a: ReportArgs) -> Result<()> {
    let mut run = Run::new("report");
    run.input(&a.cells)?;
    let cells = parse_cells_csv(&read_text(&a.cells)?)?;
    let matrix = mean_matrix(&cells);
    let table = render_matrix(&matrix)?;
    run.write(&a.out.join("matrix.txt"), &table.to_text())?;
    run.write(&a.out.join("matrix.csv"), &table.to_csv())?;
    match drop_summary(&matrix) {
        Ok(rows) => {
            let rows = rows.into_iter().map(|r| {
                vec![r.train.to_string(), r.matched.to_string(), r.bm25.to_string(), r.cited.to_string(), r.hard_drop.to_string()]
            });
            run.write(&a.out.join("drop_summary.csv"), &csv_string(&["train", "matched", "bm25_near_miss", "cited_non_rationale", "hard_drop"], rows)?)?;
        }
        Err(e) => eprintln!("note: no drop summary: {e}"),
    }
    print!("{}", table.to_text());
    run.config(&BTreeMap::<String, String>::new(), None);
    run.finish_dir(&a.out)
}

fn release(a: ReleaseAuditArgs) -> Result<()> {
    let checklist = release_audit(&a.workspace)?;
    let text = checklist.to_jsonl();
    match &a.out {
        Some(out) => {
            let mut run = Run::new("release-audit");
            run.write(out, &text)?;
            run.config(&serde_json::json!({ "workspace": a.workspace }), None);
            run.finish_file(out)?;
        }
        None => print!("{text}"),
    }
    let failures = checklist.critical_failures();
    if failures.is_empty() {
        eprintln!("release audit passed");
        Ok(())
    } else {
        let names: Vec<&str> = failures.iter().map(|c| c.check.as_str()).collect();
        Err(CliError::Data(format!("critical checks failed: {}", names.join(", "))))
    }
}

fn serve(a: ServeArgs) -> Result<()> {
    let packet_id = match &a.packet_id {
        Some(id) => id.clone(),
        None => a.packet.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "packet".into()),
    };
    let packet = AuditPacket::from_jsonl(packet_id, &read_text(&a.packet)?)?;
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| CliError::Usage(format!("bad address {}:{}: {e}", a.host, a.port)))?;
    let config = ServeConfig { packet, sessions: a.sessions, log_path: a.log };
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Data(format!("runtime: {e}")))?;
    eprintln!("serving on http://{addr}");
    runtime.block_on(neicap_serve::serve(config, addr))?;
    Ok(())
}
