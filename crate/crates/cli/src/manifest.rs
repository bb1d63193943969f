//! Run manifests: enough provenance to reproduce any emitted file.

use serde::{Deserialize, Serialize};
use std::time::{SystemTime, UNIX_EPOCH};

use hetrax_core::util::fnv1a64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// FNV-1a over the exact config bytes driving the run; stable across
    /// platforms.
    pub config_digest: String,
    pub seed: u64,
    pub tool_version: String,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn start(command: &str, config_bytes: &[u8], seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            config_digest: format!("{:016x}", fnv1a64(config_bytes)),
            seed,
            tool_version: hetrax_core::VERSION.to_string(),
            started_unix_s: now(),
            finished_unix_s: 0,
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self) {
        self.finished_unix_s = now();
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
