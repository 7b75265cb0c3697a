//! `run_manifest.json`: what each subcommand read and wrote.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StepRecord {
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub wall_clock_ms: u128,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Latest run of each subcommand.
    pub steps: BTreeMap<String, StepRecord>,
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn digests(paths: &[PathBuf]) -> std::io::Result<Vec<FileDigest>> {
    paths.iter().map(|p| Ok(FileDigest { path: p.display().to_string(), sha256: sha256_file(p)? })).collect()
}

/// Merges `step` into the manifest in `out_dir`, replacing an earlier run of
/// the same subcommand.
pub fn record_step(out_dir: &Path, name: &str, step: StepRecord) -> anyhow::Result<()> {
    let path = out_dir.join(RUN_MANIFEST_FILE);
    let mut manifest: RunManifest = match fs::read_to_string(&path) {
        Ok(text) => serde_json::from_str(&text).unwrap_or_default(),
        Err(_) => RunManifest::default(),
    };
    manifest.tool = env!("CARGO_PKG_NAME").to_string();
    manifest.version = env!("CARGO_PKG_VERSION").to_string();
    manifest.steps.insert(name.to_string(), step);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
