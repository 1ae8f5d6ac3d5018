//! File digests and run manifests.

use std::fs;
use std::path::Path;

use rec_sizer::config::ConfigFile;
use rec_sizer::schema::{InputDigest, Provenance};
use rec_sizer::sizing::SolverStats;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<InputDigest, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

/// Hash of the canonical configuration and every data file it names.
pub fn config_hash(file: &ConfigFile, base: &Path) -> Result<String, CliError> {
    let mut h = Sha256::new();
    h.update(file.to_toml_string().map_err(CliError::from)?.as_bytes());
    for rel in file.data_files().map_err(CliError::from)? {
        let bytes = fs::read(base.join(rel))
            .map_err(|e| CliError::input(format!("{}: {e}", rel.display())))?;
        h.update(rel.to_string_lossy().as_bytes());
        h.update([0]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(hex(&h.finalize()))
}

/// Everything known about one run, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub tool_version: String,
    pub config_hash: Option<String>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<InputDigest>,
    pub started_at: String,
    pub finished_at: String,
    pub solver: Option<SolverStats>,
}

/// Name of the manifest accompanying `output`.
pub fn manifest_name(output: &Path) -> String {
    format!(
        "{}.manifest.json",
        output
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into())
    )
}

pub fn provenance(command: &str, inputs: &[InputDigest], manifest: &str) -> Provenance {
    Provenance {
        command: command.into(),
        tool_version: TOOL_VERSION.into(),
        inputs: inputs.to_vec(),
        manifest: manifest.into(),
    }
}

pub struct ManifestBuilder {
    command: String,
    started_at: String,
    pub config_hash: Option<String>,
    pub inputs: Vec<InputDigest>,
    pub solver: Option<SolverStats>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl ManifestBuilder {
    pub fn start(command: &str) -> Self {
        ManifestBuilder {
            command: command.into(),
            started_at: now(),
            config_hash: None,
            inputs: Vec::new(),
            solver: None,
        }
    }

    /// Digests `outputs` and writes the manifest to `path`.
    pub fn finish(self, path: &Path, outputs: &[&Path]) -> Result<(), CliError> {
        let outputs = outputs
            .iter()
            .map(|p| digest_file(p))
            .collect::<Result<Vec<_>, _>>()?;
        let m = RunManifest {
            schema_version: rec_sizer::schema::SCHEMA_VERSION,
            command: self.command,
            tool_version: TOOL_VERSION.into(),
            config_hash: self.config_hash,
            inputs: self.inputs,
            outputs,
            started_at: self.started_at,
            finished_at: now(),
            solver: self.solver,
        };
        let text =
            serde_json::to_string_pretty(&m).map_err(|e| CliError::internal(e.to_string()))?;
        crate::write_file(path, &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_names() {
        assert_eq!(
            manifest_name(Path::new("out/solution.json")),
            "solution.json.manifest.json"
        );
    }
}
