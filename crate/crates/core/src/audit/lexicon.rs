use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// English function words excluded from overlap and coverage features.
pub const STOPWORDS: [&str; 120] = [
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and",
    "any", "are", "as", "at", "be", "because", "been", "before", "being", "below",
    "between", "both", "but", "by", "can", "could", "did", "do", "does", "doing",
    "down", "during", "each", "few", "for", "from", "further", "had", "has", "have",
    "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
    "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me",
    "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off",
    "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over",
    "own", "same", "she", "should", "so", "some", "such", "than", "that", "the",
    "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those",
    "through", "to", "too", "under", "until", "up", "very", "was", "we", "were",
    "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with",
];

pub const CONTEXT_MARKERS: [&str; 7] =
    ["however", "although", "whereas", "contrast", "previous", "previously", "background"];

pub const METHOD_MARKERS: [&str; 7] =
    ["methods", "performed", "assay", "cohort", "randomized", "measured", "enrolled"];

pub const DEFAULT_PLACEHOLDER_MARKER: &str = "NO EVIDENCE";

/// Word lists used by the shallow audit. Loadable from TOML so that
/// alternative lexicons can be swapped in without code changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Lexicons {
    pub stopwords: BTreeSet<String>,
    pub context_markers: BTreeSet<String>,
    pub method_markers: BTreeSet<String>,
    /// Evidence texts (compared case-insensitively after trimming) that count
    /// as a no-evidence placeholder. Empty evidence always counts.
    pub placeholder_markers: Vec<String>,
}

fn set(words: &[&str]) -> BTreeSet<String> {
    words.iter().map(|w| w.to_string()).collect()
}

impl Default for Lexicons {
    fn default() -> Self {
        Lexicons {
            stopwords: set(&STOPWORDS),
            context_markers: set(&CONTEXT_MARKERS),
            method_markers: set(&METHOD_MARKERS),
            placeholder_markers: vec![DEFAULT_PLACEHOLDER_MARKER.to_string()],
        }
    }
}

impl Lexicons {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn is_placeholder(&self, evidence_text: &str) -> bool {
        let t = evidence_text.trim();
        t.is_empty() || self.placeholder_markers.iter().any(|m| m.trim().eq_ignore_ascii_case(t))
    }

    /// Distinct non-stopword tokens.
    pub fn content_types(&self, text: &str) -> BTreeSet<String> {
        crate::retrieval::tokenize(text).into_iter().filter(|t| !self.stopwords.contains(t)).collect()
    }
}
