use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Record of one CLI invocation, written before any simulation starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub command: String,
    pub version: String,
    pub seeds: Vec<u64>,
    /// Seconds since the Unix epoch. Informational only; no randomness
    /// derives from it.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(command: &str, config_path: Option<&Path>, out_dir: &Path, seeds: &[u64]) -> Self {
        Self {
            config_path: config_path.map(Path::to_path_buf),
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seeds: seeds.to_vec(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.manifest.json", self.command)
    }

    pub fn write(&self) -> Result<PathBuf> {
        let path = self.out_dir.join(self.file_name());
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| CliError::io(path, "not a file path"))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let m = RunManifest::new("train", Some(Path::new("a.toml")), dir.path(), &[1, 2]);
        let path = m.write().unwrap();
        assert_eq!(path.file_name().unwrap(), "train.manifest.json");
        let back: RunManifest = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(!dir.path().join(".train.manifest.json.tmp").exists());
    }
}
