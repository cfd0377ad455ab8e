//! The `manifest.json` written last into every output directory.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const MANIFEST_SCHEMA: &str = "blockmix.manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// Every setting after applying flags, config file and defaults.
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub exit_status: u8,
    pub wall_time_seconds: f64,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config: BTreeMap<String, String>) -> Self {
        Self {
            schema: MANIFEST_SCHEMA.into(),
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            exit_status: 0,
            wall_time_seconds: 0.0,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        crate::io::write_bytes(&dir.join(MANIFEST_FILE), &crate::formats::to_json(self))
    }
}
