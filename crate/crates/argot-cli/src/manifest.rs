//! Run manifests: every output directory records the command, the
//! effective configuration, input digests, and timestamps.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub input_digests: BTreeMap<String, String>,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
}

pub struct ManifestBuilder {
    command: String,
    seed: u64,
    config: BTreeMap<String, String>,
    inputs: Vec<PathBuf>,
    started_at: chrono::DateTime<chrono::Utc>,
}

impl ManifestBuilder {
    pub fn new(command: &str, seed: u64, config: BTreeMap<String, String>) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            seed,
            config,
            inputs: Vec::new(),
            started_at: chrono::Utc::now(),
        }
    }

    pub fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.to_path_buf());
        self
    }

    /// Write `manifest.json` into the output directory.
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let mut input_digests = BTreeMap::new();
        for path in &self.inputs {
            input_digests.insert(path.display().to_string(), digest_path(path)?);
        }
        let manifest = RunManifest {
            command: self.command.clone(),
            config: self.config.clone(),
            seed: self.seed,
            input_digests,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: self.started_at.to_rfc3339(),
            finished_at: chrono::Utc::now().to_rfc3339(),
        };
        let json = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(out_dir.join("manifest.json"), json + "\n")
            .with_context(|| format!("writing manifest under {}", out_dir.display()))?;
        Ok(())
    }
}

/// SHA-256 of a file, or of the sorted per-file digests for a directory.
pub fn digest_path(path: &Path) -> Result<String> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = collect_files(path)?;
        entries.sort();
        let mut hasher = Sha256::new();
        for file in entries {
            hasher.update(file.display().to_string().as_bytes());
            hasher.update([0u8]);
            hasher.update(digest_file(&file)?.as_bytes());
        }
        Ok(format!("{:x}", hasher.finalize()))
    } else {
        digest_file(path)
    }
}

fn digest_file(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).with_context(|| format!("digesting {}", path.display()))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

fn collect_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            files.extend(collect_files(&path)?);
        } else {
            files.push(path);
        }
    }
    Ok(files)
}
