use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dataset {0:?} not found")]
    DatasetNotFound(String),

    #[error("no metadata.json found in {0}")]
    MissingManifest(PathBuf),

    #[error("invalid manifest {path}: {message}")]
    InvalidManifest { path: PathBuf, message: String },

    #[error("snapshot directory {0} does not exist")]
    MissingSnapshot(PathBuf),

    #[error("snapshot {snapshot} is missing required file {path}")]
    MissingSnapshotFile { snapshot: String, path: PathBuf },

    #[error("cyclic lineage: {}", .0.join(" -> "))]
    LineageCycle(Vec<String>),

    #[error("invalid lineage for snapshot {snapshot}: {message}")]
    InvalidLineage { snapshot: String, message: String },

    #[error("snapshots {first} and {second} share timestamp {timestamp} without explicit lineage")]
    AmbiguousOrder {
        first: String,
        second: String,
        timestamp: String,
    },

    #[error("unknown subset {0:?}")]
    UnknownSubset(String),

    #[error("unknown snapshot {0:?}")]
    UnknownSnapshot(String),

    #[error("invalid timestamp {0:?}")]
    InvalidTimestamp(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },

    #[error("invalid run: {0}")]
    InvalidRun(String),

    #[error("corrupt index {path}: {reason}")]
    CorruptIndex { path: PathBuf, reason: String },

    #[error("index {path} has format version {found}, expected {expected}")]
    IndexVersion { path: PathBuf, found: u32, expected: u32 },

    #[error("missing index: expected {0}")]
    MissingIndex(PathBuf),

    #[error("invalid pipeline: {0}")]
    InvalidPipeline(String),

    #[error("temporal isolation violated: evaluating {evaluating} attempted to read {artifact} of {target}")]
    TemporalViolation {
        evaluating: String,
        target: String,
        artifact: &'static str,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    /// Short stable identifier of the error variant, for machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::DatasetNotFound(_) => "dataset-not-found",
            Error::MissingManifest(_) => "missing-manifest",
            Error::InvalidManifest { .. } => "invalid-manifest",
            Error::MissingSnapshot(_) => "missing-snapshot",
            Error::MissingSnapshotFile { .. } => "missing-snapshot-file",
            Error::LineageCycle(_) => "lineage-cycle",
            Error::InvalidLineage { .. } => "invalid-lineage",
            Error::AmbiguousOrder { .. } => "ambiguous-order",
            Error::UnknownSubset(_) => "unknown-subset",
            Error::UnknownSnapshot(_) => "unknown-snapshot",
            Error::InvalidTimestamp(_) => "invalid-timestamp",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Parse { .. } => "parse",
            Error::DuplicateId { .. } => "duplicate-id",
            Error::InvalidRun(_) => "invalid-run",
            Error::CorruptIndex { .. } => "corrupt-index",
            Error::IndexVersion { .. } => "index-version",
            Error::MissingIndex(_) => "missing-index",
            Error::InvalidPipeline(_) => "invalid-pipeline",
            Error::TemporalViolation { .. } => "temporal-violation",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
