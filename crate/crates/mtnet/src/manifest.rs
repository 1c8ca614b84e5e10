//! `manifest.json`: every artifact of a run with its digest, the config
//! hash and the seed. The creation time is the only nondeterministic field.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    /// Some cells failed; their rows are marked in the outputs.
    Partial,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub seed: u64,
    pub config_hash: String,
    pub created_unix: u64,
    pub artifacts: Vec<Artifact>,
}

pub fn sha256_file(path: &Path) -> Result<(u64, String)> {
    let bytes = std::fs::read(path).map_err(|e| AppError::io(path, e))?;
    let digest = Sha256::digest(&bytes);
    Ok((bytes.len() as u64, digest.iter().map(|b| format!("{b:02x}")).collect()))
}

impl Manifest {
    pub fn build(
        command: &str,
        status: RunStatus,
        error: Option<String>,
        seed: u64,
        config_hash: &str,
        dir: &Path,
        files: &[PathBuf],
    ) -> Result<Self> {
        let mut artifacts = Vec::with_capacity(files.len());
        for f in files {
            let (bytes, sha256) = sha256_file(f)?;
            let name = f.strip_prefix(dir).unwrap_or(f).to_string_lossy().into_owned();
            artifacts.push(Artifact {
                file: name,
                bytes,
                sha256,
                config_hash: config_hash.to_string(),
                seed,
            });
        }
        let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Ok(Manifest {
            command: command.to_string(),
            status,
            error,
            seed,
            config_hash: config_hash.to_string(),
            created_unix,
            artifacts,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| AppError::io(&path, e))?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| AppError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| AppError::input(&path, e.to_string()))
    }
}
