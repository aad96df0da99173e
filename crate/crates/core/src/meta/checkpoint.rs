use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::autodiff::{load_params, save_params, ModelParams};
use crate::error::{Error, Result};

use super::MetaConfig;

/// JSON sidecar stored next to a parameter file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub config: MetaConfig,
    /// SHA-256 of the training data, see [`dataset_fingerprint`].
    pub dataset_sha256: String,
    pub k: usize,
    pub input_len: usize,
}

/// Hex SHA-256 over the little-endian bytes of every value.
pub fn dataset_fingerprint(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes `path` (binary parameters) and `path.json` (metadata).
pub fn save_checkpoint(path: &Path, params: &ModelParams, meta: &CheckpointMeta) -> Result<()> {
    save_params(path, params)?;
    let side = sidecar(path);
    std::fs::write(&side, serde_json::to_string_pretty(meta)?).map_err(|e| Error::io(side, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(ModelParams, CheckpointMeta)> {
    let params = load_params(path)?;
    let side = sidecar(path);
    let text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    Ok((params, serde_json::from_str(&text)?))
}
