//! Run manifests: enough to re-run a command and check its outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Command;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileDigest {
    /// File path as given on the command line, or `-` for stdout.
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    /// Every resolved parameter of the command, defaults included.
    pub params: Command,
    pub master_seed: u64,
    /// Informational: outputs do not depend on it.
    pub workers: usize,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) })
}

impl RunManifest {
    pub fn new(command: &Command, master_seed: u64, workers: usize, output: FileDigest) -> Result<Self> {
        let inputs = command.inputs().iter().map(|p| digest_file(p)).collect::<Result<Vec<_>>>()?;
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(RunManifest {
            command: command.name().to_string(),
            argv: std::env::args().collect(),
            params: command.clone(),
            master_seed,
            workers,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            inputs,
            outputs: vec![output],
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }
}

/// `<out>.manifest.json` next to the output file.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}
