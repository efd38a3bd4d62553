use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ValidateError;
use crate::manifest::ParseEnumError;

/// Annotator id carried by resolution records.
pub const CONSENSUS_ANNOTATOR: &str = "consensus";

macro_rules! schema_enum {
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

schema_enum!(
    /// Five-way adjudication outcome.
    AdjudicationLabel, "adjudication label", {
        TrulyInsufficient => "truly_insufficient",
        ActuallySupported => "actually_supported",
        ActuallyContradicted => "actually_contradicted",
        Ambiguous => "ambiguous",
        InvalidOrUnreadable => "invalid_or_unreadable",
    }
);

schema_enum!(
    /// Kind of insufficiency, recorded only for `truly_insufficient`.
    Subtype, "subtype", {
        BroadTopic => "broad_topic",
        NearMiss => "near_miss",
        Partial => "partial",
        TopicUnrelated => "topic_unrelated",
    }
);

impl Subtype {
    /// Related-but-insufficient subtypes; `topic_unrelated` is the easy case.
    pub fn is_hard(self) -> bool {
        !matches!(self, Subtype::TopicUnrelated)
    }
}

/// One annotator's judgment of one blinded item.
///
/// The label travels as `judgment` on the wire so that annotation files and
/// service responses never carry a field called `label`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjudicationRecord {
    pub item_id: String,
    pub annotator_id: String,
    #[serde(rename = "judgment")]
    pub label: AdjudicationLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtype: Option<Subtype>,
    #[serde(default)]
    pub timestamp: String,
}

impl AdjudicationRecord {
    pub fn new(
        item_id: impl Into<String>,
        annotator_id: impl Into<String>,
        label: AdjudicationLabel,
        subtype: Option<Subtype>,
    ) -> Self {
        AdjudicationRecord {
            item_id: item_id.into(),
            annotator_id: annotator_id.into(),
            label,
            subtype,
            timestamp: String::new(),
        }
    }

    /// A subtype may accompany `truly_insufficient` only.
    pub fn check(&self) -> Result<(), ValidateError> {
        if self.subtype.is_some() && self.label != AdjudicationLabel::TrulyInsufficient {
            return Err(ValidateError::InvalidAnnotation {
                item_id: self.item_id.clone(),
                detail: format!("subtype given with {}", self.label),
            });
        }
        Ok(())
    }
}

pub fn parse_annotations<R: BufRead>(reader: R) -> Result<Vec<AdjudicationRecord>, ValidateError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: AdjudicationRecord =
            serde_json::from_str(&line).map_err(|e| ValidateError::Format { line: i + 1, detail: e.to_string() })?;
        rec.check()?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_annotations<W: Write>(records: &[AdjudicationRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
