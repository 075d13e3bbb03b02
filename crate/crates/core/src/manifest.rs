//! Run manifests: what was run, with which inputs, and what it wrote.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "OSWIT_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, parameters: Value, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            parameters,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn output(&mut self, path: impl Into<PathBuf>) {
        self.outputs.push(path.into());
    }

    pub fn finish(&mut self, started: Instant) {
        self.wall_time_s = started.elapsed().as_secs_f64();
    }

    /// Equality ignoring wall time.
    pub fn same_run(&self, other: &Self) -> bool {
        Self {
            wall_time_s: 0.0,
            ..self.clone()
        } == Self {
            wall_time_s: 0.0,
            ..other.clone()
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// `OSWIT_SEED` if set, else `fallback`. Accepts decimal or `0x` hex.
pub fn seed_override(fallback: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(raw) => parse_seed(&raw),
        Err(_) => Ok(fallback),
    }
}

pub fn parse_seed(raw: &str) -> Result<u64> {
    let raw = raw.trim();
    let parsed = match raw.strip_prefix("0x").or_else(|| raw.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => raw.parse(),
    };
    parsed.map_err(|_| crate::error::Error::InvalidParameter(format!("bad seed {raw:?}")))
}
