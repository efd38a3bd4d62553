use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::provenance::file_sha256;
use super::ReportError;
use crate::manifest::{read_manifest, rules, validate_manifest};
use crate::metrics::{prediction_coverage, read_predictions, PredictionRecord};

/// Name of the declaration file at a workspace root.
pub const WORKSPACE_FILE: &str = "neicap-workspace.toml";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedClaimInput {
    pub manifest: String,
    pub predictions: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnavailableCase {
    pub case: String,
    pub reason: String,
}

/// What a release workspace promises. Paths are relative to the root.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkspaceDecl {
    pub key_reports: Vec<String>,
    pub tables: Vec<String>,
    /// Tables computed on single-label gold subsets.
    pub one_class_tables: Vec<String>,
    pub manifests: Vec<String>,
    pub fixed_claim: Vec<FixedClaimInput>,
    /// Run registry and similar records that only need to exist.
    pub registry: Vec<String>,
    pub unavailable: Vec<UnavailableCase>,
    /// path → sha256 of outputs that must not change.
    pub locks: BTreeMap<String, String>,
}

impl WorkspaceDecl {
    pub fn load(root: &Path) -> Result<Self, ReportError> {
        let path = root.join(WORKSPACE_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| ReportError::Workspace { path: path.display().to_string(), detail: e.to_string() })?;
        toml::from_str(&text).map_err(|e| ReportError::Workspace { path: path.display().to_string(), detail: e.to_string() })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("declaration serializes")
    }
}

/// Hashes each path under `root`.
pub fn lock_files(root: &Path, paths: &[String]) -> Result<BTreeMap<String, String>, ReportError> {
    paths.iter().map(|p| Ok((p.clone(), file_sha256(root.join(p))?))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub passed: bool,
    pub critical: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditChecklist {
    pub checks: Vec<CheckResult>,
}

impl AuditChecklist {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn critical_failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| c.critical && !c.passed).collect()
    }

    pub fn get(&self, check: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == check)
    }

    pub fn to_jsonl(&self) -> String {
        self.checks.iter().map(|c| serde_json::to_string(c).expect("check serializes") + "\n").collect()
    }
}

fn outcome(check: &str, critical: bool, failures: Vec<String>, ok: &str) -> CheckResult {
    CheckResult {
        check: check.into(),
        passed: failures.is_empty(),
        critical,
        detail: if failures.is_empty() { ok.into() } else { failures.join("; ") },
    }
}

fn table_problem(path: &Path) -> Option<String> {
    let mut rdr = match csv::Reader::from_path(path) {
        Ok(r) => r,
        Err(e) => return Some(e.to_string()),
    };
    match rdr.headers() {
        Ok(h) if h.is_empty() || h.iter().all(str::is_empty) => return Some("no header".into()),
        Err(e) => return Some(e.to_string()),
        _ => {}
    }
    match rdr.records().next() {
        None => Some("no data rows".into()),
        Some(Err(e)) => Some(e.to_string()),
        Some(Ok(_)) => None,
    }
}

fn is_macro_f1(column: &str) -> bool {
    let c: String = column.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
    c.contains("macrof1")
}

/// Runs every mechanizable release check. Reads only; the declaration
/// itself is the one hard error.
pub fn release_audit(root: &Path) -> Result<AuditChecklist, ReportError> {
    let decl = WorkspaceDecl::load(root)?;
    let exists = |p: &String| root.join(p).is_file();
    let mut checks = Vec::new();

    let missing: Vec<String> = decl.key_reports.iter().filter(|p| !exists(p)).map(|p| format!("{p} missing")).collect();
    checks.push(outcome("key_reports_exist", true, missing, &format!("{} report(s) present", decl.key_reports.len())));

    let bad: Vec<String> = decl
        .tables
        .iter()
        .chain(&decl.one_class_tables)
        .filter_map(|p| table_problem(&root.join(p)).map(|why| format!("{p}: {why}")))
        .collect();
    checks.push(outcome("tables_non_empty", true, bad, "every declared table has rows"));

    let mut bad = Vec::new();
    for p in &decl.one_class_tables {
        if let Ok(mut rdr) = csv::Reader::from_path(root.join(p)) {
            if let Ok(h) = rdr.headers() {
                bad.extend(h.iter().filter(|c| is_macro_f1(c)).map(|c| format!("{p} has column {c}")));
            }
            // Long-format tables name the metric in their first field.
            for (i, rec) in rdr.records().flatten().enumerate() {
                if rec.get(0).is_some_and(is_macro_f1) {
                    bad.push(format!("{p} row {} reports {}", i + 2, &rec[0]));
                }
            }
        }
    }
    checks.push(outcome("no_macro_f1_on_one_class", true, bad, "no Macro-F1 column or row on one-class tables"));

    let mut bad = Vec::new();
    for p in &decl.manifests {
        match read_manifest(root.join(p)) {
            Ok(records) => bad.extend(
                validate_manifest(&records)
                    .into_iter()
                    .filter(|v| v.rule == rules::CANDIDATE_ONLY)
                    .map(|v| format!("{p}: {} is candidate-only but valid_nei", v.example_id)),
            ),
            Err(e) => bad.push(format!("{p}: {e}")),
        }
    }
    checks.push(outcome("candidate_only_not_validated", true, bad, "no candidate-only record is marked validated"));

    let mut bad = Vec::new();
    for fc in &decl.fixed_claim {
        let gold = match read_manifest(root.join(&fc.manifest)) {
            Ok(g) => g,
            Err(e) => {
                bad.push(format!("{}: {e}", fc.manifest));
                continue;
            }
        };
        if fc.predictions.is_empty() {
            bad.push(format!("{}: no prediction logs declared", fc.manifest));
        }
        for pp in &fc.predictions {
            let preds = match read_predictions(root.join(pp)) {
                Ok(p) => p,
                Err(e) => {
                    bad.push(format!("{pp}: {e}"));
                    continue;
                }
            };
            let mut by_run: BTreeMap<(&str, u64), Vec<PredictionRecord>> = BTreeMap::new();
            for p in &preds {
                by_run.entry((p.model_id.as_str(), p.seed)).or_default().push(p.clone());
            }
            if by_run.is_empty() {
                bad.push(format!("{pp}: empty prediction log"));
            }
            for ((model, seed), run) in &by_run {
                let cov = prediction_coverage(gold.iter().map(|r| r.example_id.as_str()), run);
                if !cov.is_complete() {
                    bad.push(format!(
                        "{pp} {model} seed {seed}: coverage {:.3} ({} missing, {} duplicated)",
                        cov.coverage,
                        cov.missing.len(),
                        cov.duplicated.len()
                    ));
                }
            }
        }
    }
    checks.push(outcome("fixed_claim_coverage", true, bad, "prediction coverage 1.000 on every fixed-claim log"));

    let mut bad = Vec::new();
    for (p, want) in &decl.locks {
        match file_sha256(root.join(p)) {
            Ok(got) if got == *want => {}
            Ok(got) => bad.push(format!("{p} changed (sha256 {got}, locked {want})")),
            Err(e) => bad.push(format!("{p}: {e}")),
        }
    }
    checks.push(outcome("locked_outputs_unchanged", true, bad, &format!("{} locked file(s) unchanged", decl.locks.len())));

    let bad: Vec<String> = decl
        .unavailable
        .iter()
        .filter(|u| u.reason.trim().is_empty())
        .map(|u| format!("{} has no reason", u.case))
        .collect();
    checks.push(outcome("unavailable_reasons_documented", false, bad, "every unavailable case has a reason"));

    let missing: Vec<String> = decl.registry.iter().filter(|p| !exists(p)).map(|p| format!("{p} missing")).collect();
    checks.push(outcome("run_registry_present", false, missing, "declared registry paths exist"));

    Ok(AuditChecklist { checks })
}
