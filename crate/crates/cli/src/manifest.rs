//! Run manifests written next to every output file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: &'static str,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

pub struct Recorder {
    subcommand: String,
    parameters: serde_json::Value,
    seed: Option<u64>,
    started: Instant,
    started_unix: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

impl Recorder {
    pub fn start(subcommand: &str, parameters: serde_json::Value, seed: Option<u64>) -> Self {
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Recorder { subcommand: subcommand.to_string(), parameters, seed, started: Instant::now(), started_unix }
    }

    /// Writes `bytes` to `out` and the manifest beside it.
    pub fn write_output(self, out: &Path, bytes: &[u8]) -> Result<()> {
        fs::write(out, bytes).with_context(|| format!("writing {}", out.display()))?;
        let manifest = RunManifest {
            subcommand: self.subcommand,
            parameters: self.parameters,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION"),
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            outputs: vec![OutputDigest { path: out.display().to_string(), sha256: sha256_hex(bytes) }],
        };
        let path = manifest_path(out);
        let json = serde_json::to_string_pretty(&manifest)?;
        fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
