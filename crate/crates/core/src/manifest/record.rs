use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Three-way verification label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "SUPPORT")]
    Support,
    #[serde(rename = "REFUTE")]
    Refute,
    #[serde(rename = "NEI")]
    Nei,
}

impl Label {
    /// Fixed label order used by every probability triple and weight matrix.
    pub const ALL: [Label; 3] = [Label::Support, Label::Refute, Label::Nei];

    pub fn index(self) -> usize {
        match self {
            Label::Support => 0,
            Label::Refute => 1,
            Label::Nei => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Support => "SUPPORT",
            Label::Refute => "REFUTE",
            Label::Nei => "NEI",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} value {value:?}")]
pub struct ParseEnumError {
    pub kind: &'static str,
    pub value: String,
}

impl FromStr for Label {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SUPPORT" => Ok(Label::Support),
            "REFUTE" => Ok(Label::Refute),
            "NEI" => Ok(Label::Nei),
            _ => Err(ParseEnumError { kind: "label", value: s.to_string() }),
        }
    }
}

macro_rules! snake_enum {
    ($(#[$meta:meta])* $name:ident, $kind:literal, { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = ParseEnumError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(ParseEnumError { kind: $kind, value: s.to_string() }),
                }
            }
        }
    };
}

snake_enum!(
    /// The rule that produced an example's evidence condition.
    ///
    /// `Reference` is reserved for SUPPORT/REFUTE examples carrying gold
    /// evidence; every NEI example names the family that built it.
    ConstructionFamily, "construction", {
        Reference => "reference",
        Placeholder => "placeholder",
        RandomIrrelevant => "random_irrelevant",
        PositionBiased => "position_biased",
        Bm25NearMiss => "bm25_near_miss",
        CitedNonRationale => "cited_non_rationale",
        SameDocument => "same_document",
        FixedClaim => "fixed_claim",
        MissingHop => "missing_hop",
    }
);

impl ConstructionFamily {
    /// Families whose outputs may only ever be candidates, never human-validated.
    pub fn is_candidate_only(self) -> bool {
        matches!(self, ConstructionFamily::MissingHop)
    }
}

snake_enum!(
    Split, "split", {
        Train => "train",
        Dev => "dev",
        Test => "test",
        Audit => "audit",
    }
);

snake_enum!(
    ValidationStatus, "validation_status", {
        NotValidated => "not_validated",
        Candidate => "candidate",
        ValidNei => "valid_nei",
        Contaminated => "contaminated",
        Ambiguous => "ambiguous",
    }
);

/// One piece of evidence: a text span with optional document provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceUnit {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_ids: Option<Vec<u32>>,
    pub text: String,
}

impl EvidenceUnit {
    pub fn text(text: impl Into<String>) -> Self {
        EvidenceUnit { doc_id: None, sentence_ids: None, text: text.into() }
    }
}

/// One claim–evidence–label instance with its construction provenance.
///
/// Optional fields are omitted from the serialized form rather than written
/// as `null`. Fields not known to this schema are kept in `extra` and written
/// back after the known fields, in key order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestRecord {
    pub example_id: String,
    pub claim_id: String,
    pub group_id: String,
    pub source_data: String,
    pub claim: String,
    pub evidence: Vec<EvidenceUnit>,
    pub label: Label,
    pub construction: ConstructionFamily,
    pub split: Split,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub document_id: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentence_ids: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retrieval_method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retrieval_rank: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bm25_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sentence_position: Option<Vec<u32>>,
    pub validation_status: ValidationStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjudicated_label: Option<String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl ManifestRecord {
    /// A record with every optional field empty.
    pub fn new(
        example_id: impl Into<String>,
        claim_id: impl Into<String>,
        claim: impl Into<String>,
        evidence: Vec<EvidenceUnit>,
        label: Label,
        construction: ConstructionFamily,
    ) -> Self {
        let claim_id = claim_id.into();
        ManifestRecord {
            example_id: example_id.into(),
            group_id: claim_id.clone(),
            claim_id,
            source_data: String::from("derived"),
            claim: claim.into(),
            evidence,
            label,
            construction,
            split: Split::Train,
            document_id: None,
            sentence_ids: None,
            retrieval_method: None,
            retrieval_rank: None,
            bm25_score: None,
            sentence_position: None,
            validation_status: ValidationStatus::NotValidated,
            adjudicated_label: None,
            extra: BTreeMap::new(),
        }
    }

    /// Evidence units joined with single spaces.
    pub fn evidence_text(&self) -> String {
        let mut out = String::new();
        for unit in &self.evidence {
            if unit.text.is_empty() {
                continue;
            }
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&unit.text);
        }
        out
    }
}
