//! Binary snapshots of prepared splits, keyed by a content hash.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use super::split::DatasetSplit;
use super::DataError;

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    version: u32,
    config_hash: String,
    split: DatasetSplit,
}

/// Serialize a split; returns the sha256 hex digest of the written bytes.
pub fn save_snapshot(
    path: &Path,
    split: &DatasetSplit,
    config_hash: &str,
) -> Result<String, DataError> {
    let file = SnapshotFile {
        version: SNAPSHOT_VERSION,
        config_hash: config_hash.to_string(),
        split: split.clone(),
    };
    let bytes = bincode::serialize(&file).map_err(|e| DataError::BadSnapshot {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| DataError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, &bytes).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(hex_digest(&bytes))
}

/// Load a snapshot; returns the split, the config hash it was prepared
/// under, and the content digest.
pub fn load_snapshot(path: &Path) -> Result<(DatasetSplit, String, String), DataError> {
    let bytes = std::fs::read(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            DataError::MissingFile(path.to_path_buf())
        } else {
            DataError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let digest = hex_digest(&bytes);
    let file: SnapshotFile = bincode::deserialize(&bytes).map_err(|e| DataError::BadSnapshot {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if file.version != SNAPSHOT_VERSION {
        return Err(DataError::BadSnapshot {
            path: path.to_path_buf(),
            message: format!(
                "version {} unsupported (expected {SNAPSHOT_VERSION})",
                file.version
            ),
        });
    }
    Ok((file.split, file.config_hash, digest))
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
