//! Run manifests: every output file gets a `<file>.manifest.json` sibling
//! holding the fully-resolved parameters and the canonical argv that
//! reproduces it. `mesofringe replay <manifest>` re-executes that argv;
//! with the recorded seed, outputs come back byte-identical.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};


use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// Wall-clock stamp of the original run: informational only, never
    /// part of the data outputs.
    pub timestamp: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Canonical argument list (without the binary name) that reproduces
    /// the output bit for bit.
    pub argv: Vec<String>,
    pub params: Map<String, Value>,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, argv: Vec<String>, params: Map<String, Value>) -> Self {
        RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: unix_timestamp(),
            seed,
            argv,
            params,
        }
    }

    /// Write next to `output`: `<output>.manifest.json`.
    pub fn write_beside(&self, output: &Path) -> Result<(), CliError> {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&name, body + "\n")
            .map_err(|e| CliError::io(format!("writing manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("{} is not a run manifest: {e}", path.display())))
    }
}

fn unix_timestamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{secs}")
}
