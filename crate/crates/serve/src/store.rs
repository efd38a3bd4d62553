use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use neicap::validate::AdjudicationRecord;
use serde::{Deserialize, Serialize};

use crate::ServeError;

/// One durable log line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub packet_id: String,
    pub session_id: String,
    #[serde(flatten)]
    pub record: AdjudicationRecord,
}

/// Append-only JSONL log. Every append is flushed and synced before it
/// returns.
#[derive(Debug)]
pub struct LabelLog {
    path: PathBuf,
    file: File,
}

impl LabelLog {
    /// Opens (creating if needed) and replays the log.
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, Vec<LogEntry>), ServeError> {
        let path = path.as_ref().to_path_buf();
        let mut entries = Vec::new();
        if path.exists() {
            for (i, line) in BufReader::new(File::open(&path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: LogEntry = serde_json::from_str(&line)
                    .map_err(|e| ServeError::Log { line: i + 1, detail: e.to_string() })?;
                entries.push(entry);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok((LabelLog { path, file }, entries))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, entry: &LogEntry) -> Result<(), ServeError> {
        let mut line = serde_json::to_vec(entry).map_err(|e| ServeError::Log { line: 0, detail: e.to_string() })?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        Ok(())
    }
}

/// One annotator's pass over a packet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Session {
    pub session_id: String,
    pub annotator_id: String,
    pub packet_id: String,
    /// Lowest index without a label; equals the packet size when done.
    pub cursor: usize,
    pub submitted: BTreeMap<String, AdjudicationRecord>,
}

impl Session {
    pub fn new(session_id: &str, annotator_id: &str, packet_id: &str) -> Self {
        Session {
            session_id: session_id.into(),
            annotator_id: annotator_id.into(),
            packet_id: packet_id.into(),
            cursor: 0,
            submitted: BTreeMap::new(),
        }
    }

    pub fn advance(&mut self, item_ids: &[String]) {
        while self.cursor < item_ids.len() && self.submitted.contains_key(&item_ids[self.cursor]) {
            self.cursor += 1;
        }
    }
}
