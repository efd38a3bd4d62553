use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use neicap::manifest::ConstructionFamily;
use neicap::probe::FeatureSpec;
use neicap::validate::DEFAULT_TEST_RATIO;
use neicap_serve::SessionSpec;

#[derive(Debug, Parser)]
#[command(name = "neicap", version, about = "Build, audit, validate and score construction-aware NEI evaluation data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the generated sample corpus (documents, claims, multi-hop claims).
    Sample(SampleArgs),
    /// Build one construction variant (reference records plus one NEI family).
    Construct(ConstructArgs),
    /// Assign whole claim groups to train/dev/test.
    Split(SplitArgs),
    /// Split statistics, leakage, shallow-feature summaries and separability.
    Audit(AuditArgs),
    /// Shallow probe baselines.
    #[command(subcommand)]
    Probe(ProbeCommand),
    /// Score a prediction log against a gold manifest.
    Eval(EvalArgs),
    /// Pair reference and hard records and compute the fixed-claim drop.
    FixedClaim(FixedClaimArgs),
    /// Draw a blinded audit packet and its separate key.
    ValidateSample(ValidateSampleArgs),
    /// Merge two annotation streams; report agreement and validity rates.
    ValidateMerge(MergeArgs),
    /// Keep adjudicated hard items and hold out a group-disjoint test split.
    DeriveHard(DeriveHardArgs),
    /// Render the NEI-F1 matrix and drop summary from per-seed cells.
    Report(ReportArgs),
    /// Run the release checklist over a declared workspace.
    ReleaseAudit(ReleaseAuditArgs),
    /// Serve an audit packet to annotators over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 13)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Slots {
    /// NEI claims of the corpus.
    Nei,
    /// SUPPORT and REFUTE claims, for fixed-claim hard sides.
    Gold,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    /// Directory holding documents.jsonl and claims.jsonl.
    #[arg(long, required_unless_present = "multihop")]
    pub corpus: Option<PathBuf>,
    /// Construction family to build.
    #[arg(long, value_parser = parse_family)]
    pub family: Option<ConstructionFamily>,
    /// TOML construction config; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Which claims receive NEI evidence. `gold` emits NEI records only.
    #[arg(long, value_enum, default_value_t = Slots::Nei)]
    pub slots: Slots,
    /// Multi-hop claims (JSONL), for the missing_hop family.
    #[arg(long)]
    pub multihop: Option<PathBuf>,
    /// Mark emitted NEI records as adjudication candidates.
    #[arg(long)]
    pub candidates: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// train,dev,test fractions summing to 1.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "0.8,0.1,0.1")]
    pub ratios: Vec<f64>,
    #[arg(long, default_value_t = 13)]
    pub seed: u64,
    /// group_id<TAB>split assignment file.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the manifest with splits applied.
    #[arg(long)]
    pub apply: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Manifest to audit; repeat for several variants (name = file stem).
    #[arg(long = "manifest", required = true)]
    pub manifests: Vec<PathBuf>,
    /// Corpus for provenance checks.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// family_a,family_b pairs to probe for separability; repeatable.
    #[arg(long, value_parser = parse_pair)]
    pub separability: Vec<(ConstructionFamily, ConstructionFamily)>,
    #[arg(long, default_value_t = 13)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ProbeCommand {
    /// Train on each variant and score every variant, once per seed.
    Matrix(ProbeArgs),
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// family=path of a variant manifest with train and test splits; repeatable.
    #[arg(long = "variant", required = true, value_parser = parse_variant)]
    pub variants: Vec<(ConstructionFamily, PathBuf)>,
    #[arg(long, default_value = "tfidf_claim_evidence", value_parser = parse_spec)]
    pub spec: FeatureSpec,
    #[arg(long, value_delimiter = ',', default_value = "13,17,23,29,37")]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Resample {
    Examples,
    Groups,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub preds: PathBuf,
    /// Report NEI recall and false SUPPORT/REFUTE rates on an all-NEI subset.
    #[arg(long, conflicts_with = "macro_f1")]
    pub one_class: bool,
    /// Require Macro-F1; refused on single-label gold.
    #[arg(long)]
    pub macro_f1: bool,
    /// Add percentile bootstrap intervals (one-class reports).
    #[arg(long, value_enum)]
    pub bootstrap: Option<Resample>,
    #[arg(long, default_value_t = 2000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 13)]
    pub seed: u64,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixedClaimArgs {
    /// Manifest holding the SUPPORT/REFUTE reference records.
    #[arg(long)]
    pub reference: PathBuf,
    /// Manifest holding validated hard NEI records for the same claims.
    #[arg(long)]
    pub hard: PathBuf,
    /// Prediction log covering both sides; omit to only write the pairs.
    #[arg(long)]
    pub preds: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateSampleArgs {
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 13)]
    pub seed: u64,
    #[arg(long, default_value = "packet")]
    pub packet_id: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MergeArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Resolution records from the `consensus` annotator.
    #[arg(long)]
    pub resolutions: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 13)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DeriveHardArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub resolutions: Option<PathBuf>,
    /// Packet key written by validate-sample.
    #[arg(long)]
    pub key: PathBuf,
    /// Candidate manifest the packet was drawn from.
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TEST_RATIO)]
    pub test_ratio: f64,
    #[arg(long, default_value_t = 13)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Per-seed cell CSV written by `probe`.
    #[arg(long)]
    pub cells: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReleaseAuditArgs {
    /// Workspace root holding neicap-workspace.toml.
    #[arg(long, env = "NEICAP_WORKSPACE", default_value = ".")]
    pub workspace: PathBuf,
    /// Checklist JSONL; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Blinded packet JSONL written by validate-sample.
    #[arg(long)]
    pub packet: PathBuf,
    #[arg(long)]
    pub port: u16,
    /// Packet id; defaults to the packet file stem.
    #[arg(long)]
    pub packet_id: Option<String>,
    /// Append-only label log.
    #[arg(long, default_value = "labels.jsonl")]
    pub log: PathBuf,
    /// session_id=annotator_id; repeatable.
    #[arg(long = "session", value_parser = parse_session, default_values = ["a=a", "b=b"])]
    pub sessions: Vec<SessionSpec>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
}

fn parse_family(s: &str) -> Result<ConstructionFamily, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = ConstructionFamily::ALL.iter().map(|f| f.as_str()).collect();
        format!("unknown family {s:?}; expected one of {}", names.join(", "))
    })
}

fn parse_spec(s: &str) -> Result<FeatureSpec, String> {
    s.parse().map_err(|_| {
        format!("unknown feature spec {s:?}; expected tfidf_claim_evidence, tfidf_evidence_only or length_overlap")
    })
}

fn parse_variant(s: &str) -> Result<(ConstructionFamily, PathBuf), String> {
    let (family, path) = s.split_once('=').ok_or_else(|| format!("expected family=path, got {s:?}"))?;
    Ok((parse_family(family)?, PathBuf::from(path)))
}

fn parse_pair(s: &str) -> Result<(ConstructionFamily, ConstructionFamily), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected family_a,family_b, got {s:?}"))?;
    Ok((parse_family(a)?, parse_family(b)?))
}

fn parse_session(s: &str) -> Result<SessionSpec, String> {
    match s.split_once('=') {
        Some((id, annotator)) if !id.is_empty() && !annotator.is_empty() => {
            Ok(SessionSpec { session_id: id.to_string(), annotator_id: annotator.to_string() })
        }
        _ => Err(format!("expected session_id=annotator_id, got {s:?}")),
    }
}
