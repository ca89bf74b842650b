use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{io_err, CliError};

/// Inputs and provenance of one command invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 over every input that influences the outputs.
    pub config_hash: String,
    pub dataset_paths: Vec<String>,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    /// Resolved inputs as hashed.
    pub inputs: serde_json::Value,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(io_err(&path))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
