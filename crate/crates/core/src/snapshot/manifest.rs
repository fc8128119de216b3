use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "metadata.json";

/// `metadata.json` at the root of a collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaManifest {
    pub name: String,
    pub snapshots: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub subsets: BTreeMap<String, Vec<String>>,
}

/// `metadata.json` inside a snapshot directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotManifest {
    pub snapshot: String,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Manifest {
    Meta(MetaManifest),
    Snapshot(SnapshotManifest),
}

impl Manifest {
    /// Reads `dir/metadata.json`, telling collection and snapshot manifests
    /// apart by their `snapshots` / `snapshot` key.
    pub fn read(dir: &Path) -> Result<Manifest> {
        let path = dir.join(MANIFEST_FILE);
        if !path.is_file() {
            return Err(Error::MissingManifest(dir.to_path_buf()));
        }
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let invalid = |message: String| Error::InvalidManifest {
            path: path.clone(),
            message,
        };
        let value: serde_json::Value = serde_json::from_slice(&bytes).map_err(|e| invalid(e.to_string()))?;
        let object = value
            .as_object()
            .ok_or_else(|| invalid("manifest must be a JSON object".into()))?;
        if object.contains_key("snapshots") {
            serde_json::from_value(value)
                .map(Manifest::Meta)
                .map_err(|e| invalid(e.to_string()))
        } else if object.contains_key("snapshot") {
            serde_json::from_value(value)
                .map(Manifest::Snapshot)
                .map_err(|e| invalid(e.to_string()))
        } else {
            Err(invalid("manifest has neither `snapshots` nor `snapshot`".into()))
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = match self {
            Manifest::Meta(m) => serde_json::to_string_pretty(m),
            Manifest::Snapshot(s) => serde_json::to_string_pretty(s),
        }
        .expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }
}
