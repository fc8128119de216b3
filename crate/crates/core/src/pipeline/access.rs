//! Snapshot data access scoped to one snapshot under evaluation.
//!
//! Every read goes through [`DataAccess`], which refuses data from the
//! evaluated snapshot's future (and its own judgments) and reports each read
//! to an optional [`AccessObserver`].

use std::fmt;
use std::path::Path;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::formats::{read_qrels_file, read_queries_file, DocStore, Qrels, Query};
use crate::index::{index_dir, open_index, IndexHandle};
use crate::snapshot::{Snapshot, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Artifact {
    Queries,
    Qrels,
    Documents,
    Index,
}

impl Artifact {
    pub fn name(self) -> &'static str {
        match self {
            Artifact::Queries => "queries",
            Artifact::Qrels => "qrels",
            Artifact::Documents => "documents",
            Artifact::Index => "index",
        }
    }
}

impl fmt::Display for Artifact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One attempted read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessEvent {
    pub evaluating: String,
    pub evaluating_timestamp: Timestamp,
    pub target: String,
    pub target_timestamp: Timestamp,
    pub artifact: Artifact,
}

impl AccessEvent {
    /// The evaluated snapshot's own queries, documents or index.
    pub fn is_own_input(&self) -> bool {
        self.target == self.evaluating && self.artifact != Artifact::Qrels
    }

    /// Anything other than own inputs from a snapshot not strictly earlier
    /// than the one under evaluation.
    pub fn violates_isolation(&self) -> bool {
        !self.is_own_input() && self.target_timestamp >= self.evaluating_timestamp
    }
}

pub trait AccessObserver: Send + Sync {
    fn record(&self, event: &AccessEvent);
}

/// Observer that keeps every event in memory.
#[derive(Debug, Default)]
pub struct AccessLog {
    events: Mutex<Vec<AccessEvent>>,
}

impl AccessLog {
    pub fn new() -> Arc<AccessLog> {
        Arc::new(AccessLog::default())
    }

    pub fn events(&self) -> Vec<AccessEvent> {
        self.events.lock().expect("access log poisoned").clone()
    }

    pub fn violations(&self) -> Vec<AccessEvent> {
        self.events()
            .into_iter()
            .filter(AccessEvent::violates_isolation)
            .collect()
    }
}

impl AccessObserver for AccessLog {
    fn record(&self, event: &AccessEvent) {
        self.events.lock().expect("access log poisoned").push(event.clone());
    }
}

/// Reader for the data available while evaluating one snapshot.
#[derive(Clone)]
pub struct DataAccess<'a> {
    current: &'a Snapshot,
    observer: Option<Arc<dyn AccessObserver>>,
}

impl fmt::Debug for DataAccess<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DataAccess")
            .field("current", &self.current.id())
            .field("observed", &self.observer.is_some())
            .finish()
    }
}

impl<'a> DataAccess<'a> {
    pub fn new(current: &'a Snapshot, observer: Option<Arc<dyn AccessObserver>>) -> Self {
        Self { current, observer }
    }

    pub fn current(&self) -> &'a Snapshot {
        self.current
    }

    fn admit(&self, target: &Snapshot, artifact: Artifact) -> Result<()> {
        let event = AccessEvent {
            evaluating: self.current.id().to_string(),
            evaluating_timestamp: self.current.timestamp(),
            target: target.id().to_string(),
            target_timestamp: target.timestamp(),
            artifact,
        };
        if let Some(observer) = &self.observer {
            observer.record(&event);
        }
        if event.violates_isolation() {
            return Err(Error::TemporalViolation {
                evaluating: event.evaluating,
                target: event.target,
                artifact: artifact.name(),
            });
        }
        Ok(())
    }

    pub fn queries(&self, target: &Snapshot) -> Result<Vec<Query>> {
        self.admit(target, Artifact::Queries)?;
        read_queries_file(&target.queries_path())
    }

    /// Judgments of `target`; `None` for an unjudged snapshot.
    pub fn qrels(&self, target: &Snapshot) -> Result<Option<Qrels>> {
        self.admit(target, Artifact::Qrels)?;
        target.qrels_path().map(|p| read_qrels_file(&p)).transpose()
    }

    pub fn docs_store(&self, target: &Snapshot) -> Result<DocStore> {
        self.admit(target, Artifact::Documents)?;
        DocStore::for_snapshot(target)
    }

    /// Opens `<indices_root>/index-<target id>`.
    pub fn index(&self, target: &Snapshot, indices_root: &Path) -> Result<IndexHandle> {
        self.admit(target, Artifact::Index)?;
        open_index(&index_dir(indices_root, target.id()))
    }
}
