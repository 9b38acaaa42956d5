//! Parameter persistence.
//!
//! Blob layout: the four bytes `RRL1`, a little-endian `u32` format version,
//! a little-endian `u64` parameter count, then that many little-endian `f64`
//! values in canonical parameter order. The JSON sidecar carries the layer
//! shapes and activation tags needed to rebuild the network.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LayerSpec, Mlp, NnError, Result};

pub const MAGIC: &[u8; 4] = b"RRL1";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkManifest {
    pub magic: String,
    pub version: u32,
    pub param_count: usize,
    pub layers: Vec<LayerSpec>,
}

impl Mlp {
    pub fn manifest(&self) -> NetworkManifest {
        NetworkManifest {
            magic: String::from_utf8_lossy(MAGIC).into_owned(),
            version: FORMAT_VERSION,
            param_count: self.param_count(),
            layers: self.specs(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let params = self.params();
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(params.len() as u64).to_le_bytes());
        for p in params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(manifest: &NetworkManifest, bytes: &[u8]) -> Result<Self> {
        if manifest.magic.as_bytes() != MAGIC || manifest.version != FORMAT_VERSION {
            return Err(NnError::Format(format!(
                "unsupported sidecar {} v{}",
                manifest.magic, manifest.version
            )));
        }
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return Err(NnError::Format("missing RRL1 header".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(NnError::Format(format!("unsupported blob version {version}")));
        }
        let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
        let body = &bytes[HEADER_LEN..];
        if body.len() != count * 8 {
            return Err(NnError::Format(format!(
                "blob declares {count} values but holds {} bytes",
                body.len()
            )));
        }
        let mut net = Mlp::from_specs(&manifest.layers)?;
        if net.param_count() != count || manifest.param_count != count {
            return Err(NnError::DimensionMismatch {
                expected: net.param_count(),
                got: count,
            });
        }
        let params: Vec<f64> = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        net.set_params(&params)?;
        Ok(net)
    }

    /// Writes `<stem>.bin` and `<stem>.json` under `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        fs::write(dir.join(format!("{stem}.bin")), self.to_bytes())?;
        fs::write(
            dir.join(format!("{stem}.json")),
            serde_json::to_string_pretty(&self.manifest())?,
        )?;
        Ok(())
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let manifest: NetworkManifest =
            serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
        let bytes = fs::read(dir.join(format!("{stem}.bin")))?;
        Self::from_bytes(&manifest, &bytes)
    }
}
