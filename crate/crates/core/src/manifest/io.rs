use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::Deserialize;
use serde_json::Value;

use super::record::{
    ConstructionFamily, EvidenceUnit, Label, ManifestRecord, Split, ValidationStatus,
};
use super::ManifestError;

/// Evidence as it may appear on the wire: a bare string or a list of units.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawEvidence {
    Text(String),
    Units(Vec<RawUnit>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawUnit {
    Text(String),
    Unit(EvidenceUnit),
}

/// Loosely typed mirror of [`ManifestRecord`]; every field is optional so
/// that missing fields are reported by name instead of by serde position.
#[derive(Deserialize)]
struct RawRecord {
    example_id: Option<String>,
    claim_id: Option<String>,
    group_id: Option<String>,
    source_data: Option<String>,
    claim: Option<String>,
    evidence: Option<RawEvidence>,
    label: Option<String>,
    construction: Option<String>,
    split: Option<String>,
    document_id: Option<Vec<String>>,
    sentence_ids: Option<Vec<u32>>,
    retrieval_method: Option<String>,
    retrieval_rank: Option<u32>,
    bm25_score: Option<f64>,
    sentence_position: Option<Vec<u32>>,
    validation_status: Option<String>,
    adjudicated_label: Option<String>,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

fn required<T>(line: usize, field: &'static str, value: Option<T>) -> Result<T, ManifestError> {
    value.ok_or(ManifestError::MissingField { line, field })
}

fn parse_enum<T: FromStr>(line: usize, field: &'static str, value: String) -> Result<T, ManifestError> {
    value.parse().map_err(|_| ManifestError::InvalidField { line, field, value })
}

impl RawRecord {
    fn into_record(self, line: usize) -> Result<ManifestRecord, ManifestError> {
        let example_id = required(line, "example_id", self.example_id)?;
        let claim_id = required(line, "claim_id", self.claim_id)?;
        let source_data = required(line, "source_data", self.source_data)?;
        let claim = required(line, "claim", self.claim)?;
        let evidence = match required(line, "evidence", self.evidence)? {
            RawEvidence::Text(text) => vec![EvidenceUnit::text(text)],
            RawEvidence::Units(units) => units
                .into_iter()
                .map(|u| match u {
                    RawUnit::Text(text) => EvidenceUnit::text(text),
                    RawUnit::Unit(unit) => unit,
                })
                .collect(),
        };
        let label_text = required(line, "label", self.label)?;
        let label = Label::from_str(&label_text)
            .map_err(|_| ManifestError::InvalidLabel { line, value: label_text })?;
        let construction: ConstructionFamily =
            parse_enum(line, "construction", required(line, "construction", self.construction)?)?;
        let split: Split = parse_enum(line, "split", required(line, "split", self.split)?)?;
        let validation_status = match self.validation_status {
            Some(s) => parse_enum(line, "validation_status", s)?,
            None => ValidationStatus::NotValidated,
        };
        Ok(ManifestRecord {
            group_id: self.group_id.unwrap_or_else(|| claim_id.clone()),
            example_id,
            claim_id,
            source_data,
            claim,
            evidence,
            label,
            construction,
            split,
            document_id: self.document_id,
            sentence_ids: self.sentence_ids,
            retrieval_method: self.retrieval_method,
            retrieval_rank: self.retrieval_rank,
            bm25_score: self.bm25_score,
            sentence_position: self.sentence_position,
            validation_status,
            adjudicated_label: self.adjudicated_label,
            extra: self.extra,
        })
    }
}

/// Parses a line-delimited manifest. Blank lines are skipped; line numbers
/// in errors are 1-based.
pub fn parse_manifest<R: BufRead>(reader: R) -> Result<Vec<ManifestRecord>, ManifestError> {
    let mut records = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line)
            .map_err(|source| ManifestError::Json { line: line_no, source })?;
        let record = raw.into_record(line_no)?;
        if let Some(&first) = seen.get(&record.example_id) {
            return Err(ManifestError::DuplicateId {
                id: record.example_id,
                first_line: first,
                second_line: line_no,
            });
        }
        seen.insert(record.example_id.clone(), line_no);
        records.push(record);
    }
    Ok(records)
}

pub fn parse_manifest_str(text: &str) -> Result<Vec<ManifestRecord>, ManifestError> {
    parse_manifest(text.as_bytes())
}

pub fn read_manifest(path: impl AsRef<std::path::Path>) -> Result<Vec<ManifestRecord>, ManifestError> {
    let file = std::fs::File::open(path.as_ref())?;
    parse_manifest(std::io::BufReader::new(file))
}

/// Writes one canonical JSON line per record.
pub fn write_manifest<W: Write>(records: &[ManifestRecord], mut out: W) -> Result<(), ManifestError> {
    for record in records {
        serde_json::to_writer(&mut out, record).map_err(|source| ManifestError::Json { line: 0, source })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn manifest_to_string(records: &[ManifestRecord]) -> String {
    let mut buf = Vec::new();
    write_manifest(records, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
