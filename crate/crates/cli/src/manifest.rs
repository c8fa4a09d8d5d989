use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use reliable_spanner::harness::Construction;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command_line: Vec<String>,
    /// Arguments exactly as parsed.
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: BTreeMap<String, InputFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<Construction>,
    /// Builder-reported quantities (budgets, sizes, regime).
    #[serde(default)]
    pub details: serde_json::Value,
    pub threads: usize,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(config: impl Serialize, threads: usize) -> Result<Self> {
        Ok(RunManifest {
            artifact_version: ARTIFACT_VERSION.to_string(),
            command_line: std::env::args().collect(),
            config: serde_json::to_value(config)?,
            seeds: BTreeMap::new(),
            inputs: BTreeMap::new(),
            construction: None,
            details: serde_json::Value::Null,
            threads,
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        })
    }

    pub fn seed(mut self, name: &str, seed: u64) -> Self {
        self.seeds.insert(name.to_string(), seed);
        self
    }

    /// Reads `path`, records its hash and returns the contents.
    pub fn input(&mut self, name: &str, path: &Path) -> Result<String> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.insert(
            name.to_string(),
            InputFile { path: path.to_path_buf(), sha256: hex::encode(Sha256::digest(text.as_bytes())) },
        );
        Ok(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn construction(&self) -> Result<&Construction> {
        self.construction.as_ref().context("manifest does not describe a known construction")
    }
}

/// Sidecar path `<output>.manifest.json`.
pub fn beside(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}
