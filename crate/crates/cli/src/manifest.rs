use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const STDOUT: &str = "-";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocRef {
    /// File path, or `-` for standard output.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, as given.
    pub args: Vec<String>,
    /// Working directory the arguments are relative to.
    pub cwd: String,
    pub inputs: Vec<DocRef>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<DocRef>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

/// `--manifest`, else `<out>.manifest.json`, else
/// `$HCHAN_MANIFEST_DIR` (default `.hchan/manifests`) keyed by output hash.
pub fn default_location(explicit: Option<&Path>, out: Option<&Path>, command: &str, output_sha: &str) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(o) = out {
        let mut s = o.as_os_str().to_owned();
        s.push(".manifest.json");
        return PathBuf::from(s);
    }
    let dir = std::env::var_os("HCHAN_MANIFEST_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".hchan/manifests"));
    dir.join(format!("{}-{}.json", command.replace(' ', "-"), &output_sha[..16]))
}

pub fn write(manifest: &RunManifest, path: &Path) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(())
}

pub fn load(path: &Path) -> CliResult<RunManifest> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read manifest {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct InputCheck {
    pub path: String,
    pub unchanged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub identical: bool,
    pub expected_sha256: String,
    pub actual_sha256: String,
    pub inputs: Vec<InputCheck>,
}
