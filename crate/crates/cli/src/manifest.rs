use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

/// Provenance record written next to every command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the command's arguments as canonical JSON, output paths excluded.
    pub config_hash: String,
    pub seed: Option<u64>,
    /// Input path to SHA-256 of its contents.
    pub input_hashes: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, config: &C, seed: Option<u64>) -> CliResult<Self> {
        let canonical = serde_json::to_vec(config)?;
        Ok(Self {
            command: command.into(),
            config_hash: sha256_hex(&canonical),
            seed,
            input_hashes: BTreeMap::new(),
            outputs: Vec::new(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        })
    }

    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        let bytes = std::fs::read(path)?;
        self.input_hashes
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        causal_advisor_core::io::write_json(self, path)?;
        Ok(())
    }

    /// Single-line JSON, used when a command has no output file.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

/// `G.json` -> `G.json.manifest.json`.
pub fn manifest_path_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
