//! Run manifests: every successful run writes exactly one manifest next to
//! its outputs, carrying enough to replay the run byte-for-byte.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub cmd: String,
    pub config: String,
    pub seed: u64,
    pub outputs: Vec<String>,
    pub started: u64,
    pub finished: u64,
    pub version: String,
}

pub struct ManifestBuilder {
    cmd: String,
    config: String,
    seed: u64,
    outputs: Vec<String>,
    started: u64,
}

fn now_epoch_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl ManifestBuilder {
    pub fn new(cmd: &str, config: &str, seed: u64) -> Self {
        Self {
            cmd: cmd.to_string(),
            config: config.to_string(),
            seed,
            outputs: Vec::new(),
            started: now_epoch_secs(),
        }
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.to_string_lossy().into_owned());
    }

    /// Write the manifest into `out_dir` and return its path.
    pub fn finish(self, out_dir: &Path) -> std::io::Result<PathBuf> {
        let manifest = RunManifest {
            cmd: self.cmd,
            config: self.config,
            seed: self.seed,
            outputs: self.outputs,
            started: self.started,
            finished: now_epoch_secs(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let path = out_dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(&path, json)?;
        Ok(path)
    }
}
