use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL_NAME: &str = "neicap";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Lowercase hex sha256 of a file's bytes.
pub fn file_sha256(path: impl AsRef<Path>) -> std::io::Result<String> {
    let mut f = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 8192];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StampedInput {
    pub path: PathBuf,
    pub sha256: String,
}

/// Written beside every artifact-producing run: enough to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceStamp {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub inputs: Vec<StampedInput>,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub outputs: Vec<PathBuf>,
}

impl ProvenanceStamp {
    pub fn new(command: &str, argv: Vec<String>) -> Self {
        ProvenanceStamp {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            argv,
            inputs: Vec::new(),
            config: serde_json::Value::Null,
            seed: None,
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let path = path.as_ref();
        let sha256 = file_sha256(path)?;
        self.inputs.push(StampedInput { path: path.to_path_buf(), sha256 });
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stamp serializes") + "\n"
    }

    pub fn write(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }
}
