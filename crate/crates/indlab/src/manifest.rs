//! Run manifests: enough to replay a run and compare its artifacts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "manifest/v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub tool_version: String,
    pub subcommand: String,
    /// Arguments after the program name, verbatim.
    pub argv: Vec<String>,
    pub parameters: serde_json::Value,
    pub seeds: Vec<u64>,
    /// False when the run read OS entropy.
    pub deterministic: bool,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub wall_time_ms: f64,
    pub exit_code: i32,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileDigest {
        path: path.to_path_buf(),
        sha256: sha256_hex(&bytes),
    })
}

/// Digests for the files that exist; bundled names without a file on disk
/// are skipped.
pub fn digest_existing(paths: &[PathBuf]) -> Result<Vec<FileDigest>> {
    paths.iter().filter(|p| p.is_file()).map(|p| digest_file(p)).collect()
}

impl RunManifest {
    /// Re-digests the recorded outputs and lists those that changed.
    pub fn changed_outputs(&self) -> Result<Vec<PathBuf>> {
        let mut changed = Vec::new();
        for d in &self.outputs {
            if digest_file(&d.path)?.sha256 != d.sha256 {
                changed.push(d.path.clone());
            }
        }
        Ok(changed)
    }
}
