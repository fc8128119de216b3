//! Dynamic test collections: timestamped snapshots and their lineage.
//!
//! A collection lives in a directory with a `metadata.json` manifest naming its
//! snapshots. Each snapshot is a subdirectory with its own manifest, a
//! `documents.jsonl`, a `queries.tsv` and optionally `qrels.txt`.
//!
//! ```text
//! <root>/metadata.json            {"name": .., "snapshots": [..], "subsets": {..}}
//! <root>/<id>/metadata.json       {"snapshot": "<id>", "timestamp": .., "prior": [..]}
//! <root>/<id>/documents.jsonl
//! <root>/<id>/queries.tsv
//! <root>/<id>/qrels.txt           (optional)
//! ```

mod manifest;
mod timestamp;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use manifest::{Manifest, MetaManifest, SnapshotManifest, MANIFEST_FILE};
pub use timestamp::{Precision, Timestamp};

use crate::error::{Error, Result};

pub const DOCUMENTS_FILE: &str = "documents.jsonl";
pub const QUERIES_FILE: &str = "queries.tsv";
pub const QRELS_FILE: &str = "qrels.txt";

/// Environment variable naming the root directory of the dataset registry.
pub const REGISTRY_ENV: &str = "TEMPIR_DATASETS";

/// One timestamped sub-collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    id: String,
    timestamp: Timestamp,
    dir: PathBuf,
    has_qrels: bool,
    collection: Option<String>,
    /// Most recent first.
    priors: Vec<Arc<Snapshot>>,
}

impl Snapshot {
    /// Snapshot name; equal to its directory name.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn timestamp(&self) -> Timestamp {
        self.timestamp
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Name of the enclosing collection, when loaded through one.
    pub fn collection(&self) -> Option<&str> {
        self.collection.as_deref()
    }

    pub fn documents_path(&self) -> PathBuf {
        self.dir.join(DOCUMENTS_FILE)
    }

    pub fn queries_path(&self) -> PathBuf {
        self.dir.join(QUERIES_FILE)
    }

    /// Path of the judgments file, if this snapshot is judged.
    pub fn qrels_path(&self) -> Option<PathBuf> {
        self.has_qrels.then(|| self.dir.join(QRELS_FILE))
    }

    pub fn prior_ids(&self) -> Vec<&str> {
        self.priors.iter().map(|p| p.id()).collect()
    }

    /// Prior snapshots, most recent first, truncated to `memory` entries when given.
    pub fn prior_datasets(&self, memory: Option<usize>) -> Result<&[Arc<Snapshot>]> {
        match memory {
            Some(0) => Err(Error::InvalidArgument("memory must be a positive integer".into())),
            Some(m) => Ok(&self.priors[..m.min(self.priors.len())]),
            None => Ok(&self.priors),
        }
    }
}

impl fmt::Display for Snapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.collection {
            Some(c) => write!(f, "{c}/{}", self.id),
            None => f.write_str(&self.id),
        }
    }
}

/// An ordered family of snapshots with optional named subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetaDataset {
    name: String,
    root: PathBuf,
    /// Ascending by timestamp.
    snapshots: Vec<Arc<Snapshot>>,
    subsets: BTreeMap<String, Vec<String>>,
}

impl MetaDataset {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// All member snapshots, ascending by timestamp.
    pub fn datasets(&self) -> &[Arc<Snapshot>] {
        &self.snapshots
    }

    pub fn get(&self, id: &str) -> Option<&Arc<Snapshot>> {
        self.snapshots.iter().find(|s| s.id == id)
    }

    pub fn subset_names(&self) -> impl Iterator<Item = &str> {
        self.subsets.keys().map(String::as_str)
    }

    /// View restricted to a named subset. Members keep their full lineage.
    pub fn subset(&self, name: &str) -> Result<MetaDataset> {
        let ids = self
            .subsets
            .get(name)
            .ok_or_else(|| Error::UnknownSubset(name.to_string()))?;
        let wanted: HashSet<&str> = ids.iter().map(String::as_str).collect();
        Ok(MetaDataset {
            name: format!("{}/{}", self.name, name),
            root: self.root.clone(),
            snapshots: self
                .snapshots
                .iter()
                .filter(|s| wanted.contains(s.id()))
                .cloned()
                .collect(),
            subsets: BTreeMap::new(),
        })
    }
}

/// Result of loading a locator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Loaded {
    Meta(MetaDataset),
    Snapshot(Arc<Snapshot>),
}

impl Loaded {
    /// Snapshots to process, ascending by timestamp.
    pub fn snapshots(&self) -> Vec<Arc<Snapshot>> {
        match self {
            Loaded::Meta(m) => m.datasets().to_vec(),
            Loaded::Snapshot(s) => vec![s.clone()],
        }
    }

    pub fn into_meta(self) -> Option<MetaDataset> {
        match self {
            Loaded::Meta(m) => Some(m),
            Loaded::Snapshot(_) => None,
        }
    }

    pub fn into_snapshot(self) -> Option<Arc<Snapshot>> {
        match self {
            Loaded::Snapshot(s) => Some(s),
            Loaded::Meta(_) => None,
        }
    }
}

/// Loads a collection or a single snapshot from a local directory.
pub fn load(dir: impl AsRef<Path>) -> Result<Loaded> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::DatasetNotFound(dir.display().to_string()));
    }
    match Manifest::read(dir)? {
        Manifest::Meta(meta) => load_meta(dir, meta).map(Loaded::Meta),
        Manifest::Snapshot(_) => load_single(dir).map(Loaded::Snapshot),
    }
}

/// Resolves a locator that is either a directory or a registry id such as
/// `newswire/*`, `newswire/test` or `newswire/2024-11`.
pub fn resolve(locator: &str, registry_root: Option<&Path>) -> Result<Loaded> {
    let direct = Path::new(locator);
    if direct.is_dir() {
        return load(direct);
    }
    let Some(root) = registry_root else {
        return Err(Error::DatasetNotFound(locator.to_string()));
    };
    let (name, selector) = match locator.split_once('/') {
        Some((n, s)) => (n, Some(s)),
        None => (locator, None),
    };
    let base = root.join(name);
    if !base.is_dir() {
        return Err(Error::DatasetNotFound(locator.to_string()));
    }
    let loaded = load(&base)?;
    match (selector, loaded) {
        (None | Some("*") | Some(""), loaded) => Ok(loaded),
        (Some(sel), Loaded::Meta(meta)) => {
            if meta.subsets.contains_key(sel) {
                meta.subset(sel).map(Loaded::Meta)
            } else if let Some(s) = meta.get(sel) {
                Ok(Loaded::Snapshot(s.clone()))
            } else {
                Err(Error::DatasetNotFound(locator.to_string()))
            }
        }
        (Some(_), Loaded::Snapshot(_)) => Err(Error::DatasetNotFound(locator.to_string())),
    }
}

/// Snapshot manifest plus its location, before lineage is resolved.
struct Pending {
    id: String,
    timestamp: Timestamp,
    dir: PathBuf,
    has_qrels: bool,
    prior: Option<Vec<String>>,
}

fn read_pending(dir: &Path, id: &str) -> Result<Pending> {
    if !dir.is_dir() {
        return Err(Error::MissingSnapshot(dir.to_path_buf()));
    }
    let manifest = match Manifest::read(dir)? {
        Manifest::Snapshot(s) => s,
        Manifest::Meta(_) => {
            return Err(Error::InvalidManifest {
                path: dir.join(MANIFEST_FILE),
                message: "expected a snapshot manifest, found a collection manifest".into(),
            })
        }
    };
    if manifest.snapshot != id {
        return Err(Error::InvalidManifest {
            path: dir.join(MANIFEST_FILE),
            message: format!(
                "snapshot name {:?} does not match directory name {id:?}",
                manifest.snapshot
            ),
        });
    }
    let timestamp: Timestamp = manifest.timestamp.parse()?;
    for required in [DOCUMENTS_FILE, QUERIES_FILE] {
        let path = dir.join(required);
        if !path.is_file() {
            return Err(Error::MissingSnapshotFile {
                snapshot: id.to_string(),
                path,
            });
        }
    }
    Ok(Pending {
        id: id.to_string(),
        timestamp,
        dir: dir.to_path_buf(),
        has_qrels: dir.join(QRELS_FILE).is_file(),
        prior: manifest.prior,
    })
}

fn dir_name(dir: &Path) -> Result<String> {
    let canonical = dir.canonicalize().map_err(|e| Error::io(dir, e))?;
    canonical
        .file_name()
        .and_then(|n| n.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::InvalidArgument(format!("cannot name snapshot at {}", dir.display())))
}

fn load_meta(root: &Path, meta: MetaManifest) -> Result<MetaDataset> {
    let mut seen = HashSet::new();
    let mut pending = Vec::with_capacity(meta.snapshots.len());
    for id in &meta.snapshots {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId {
                kind: "snapshot",
                id: id.clone(),
            });
        }
        pending.push(read_pending(&root.join(id), id)?);
    }
    for (subset, ids) in &meta.subsets {
        if let Some(missing) = ids.iter().find(|id| !seen.contains(id.as_str())) {
            return Err(Error::InvalidManifest {
                path: root.join(MANIFEST_FILE),
                message: format!("subset {subset:?} names unknown snapshot {missing:?}"),
            });
        }
    }
    let snapshots = resolve_lineage(pending, Some(&meta.name))?;
    Ok(MetaDataset {
        name: meta.name,
        root: root.to_path_buf(),
        snapshots,
        subsets: meta.subsets,
    })
}

/// Loads a lone snapshot directory. Explicit priors are resolved among sibling
/// directories; a snapshot listed by the parent collection manifest gets the
/// lineage it has within that collection.
fn load_single(dir: &Path) -> Result<Arc<Snapshot>> {
    let id = dir_name(dir)?;
    let parent = dir.parent().map(Path::to_path_buf).unwrap_or_default();
    if let Ok(Manifest::Meta(meta)) = Manifest::read(&parent) {
        if meta.snapshots.contains(&id) {
            let meta = load_meta(&parent, meta)?;
            return Ok(meta.get(&id).cloned().expect("member present"));
        }
    }

    // Breadth-first collection of the explicit prior closure among siblings.
    let mut pending = Vec::new();
    let mut queue = vec![(id.clone(), dir.to_path_buf())];
    let mut seen = HashSet::new();
    while let Some((sid, sdir)) = queue.pop() {
        if !seen.insert(sid.clone()) {
            continue;
        }
        let p = read_pending(&sdir, &sid)?;
        for prior in p.prior.iter().flatten() {
            queue.push((prior.clone(), parent.join(prior)));
        }
        pending.push(p);
    }
    let snapshots = resolve_lineage(pending, None)?;
    Ok(snapshots
        .into_iter()
        .find(|s| s.id == id)
        .expect("requested snapshot resolved"))
}

/// Validates lineage, infers missing prior lists and builds snapshots in
/// ascending timestamp order.
fn resolve_lineage(pending: Vec<Pending>, collection: Option<&str>) -> Result<Vec<Arc<Snapshot>>> {
    let by_id: HashMap<&str, &Pending> = pending.iter().map(|p| (p.id.as_str(), p)).collect();

    for p in &pending {
        for prior in p.prior.iter().flatten() {
            if !by_id.contains_key(prior.as_str()) {
                return Err(Error::InvalidLineage {
                    snapshot: p.id.clone(),
                    message: format!("unknown prior snapshot {prior:?}"),
                });
            }
        }
    }
    detect_cycles(&pending, &by_id)?;

    for (i, a) in pending.iter().enumerate() {
        for b in &pending[i + 1..] {
            if a.timestamp == b.timestamp && (a.prior.is_none() || b.prior.is_none()) {
                let (first, second) = if a.id <= b.id { (a, b) } else { (b, a) };
                return Err(Error::AmbiguousOrder {
                    first: first.id.clone(),
                    second: second.id.clone(),
                    timestamp: a.timestamp.to_string(),
                });
            }
        }
    }

    let mut order: Vec<&Pending> = pending.iter().collect();
    order.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));

    let mut built: HashMap<&str, Arc<Snapshot>> = HashMap::new();
    let mut result = Vec::with_capacity(order.len());
    for p in order {
        let mut prior_ids: Vec<&str> = match &p.prior {
            Some(explicit) => {
                let mut unique = HashSet::new();
                for prior in explicit {
                    if !unique.insert(prior.as_str()) {
                        return Err(Error::InvalidLineage {
                            snapshot: p.id.clone(),
                            message: format!("prior {prior:?} listed twice"),
                        });
                    }
                    if by_id[prior.as_str()].timestamp >= p.timestamp {
                        return Err(Error::InvalidLineage {
                            snapshot: p.id.clone(),
                            message: format!("prior {prior:?} is not earlier than the snapshot"),
                        });
                    }
                }
                explicit.iter().map(String::as_str).collect()
            }
            None => pending
                .iter()
                .filter(|o| o.timestamp < p.timestamp)
                .map(|o| o.id.as_str())
                .collect(),
        };
        prior_ids.sort_by(|a, b| by_id[b].timestamp.cmp(&by_id[a].timestamp));
        if let Some(w) = prior_ids
            .windows(2)
            .find(|w| by_id[w[0]].timestamp == by_id[w[1]].timestamp)
        {
            return Err(Error::InvalidLineage {
                snapshot: p.id.clone(),
                message: format!("priors {:?} and {:?} share a timestamp", w[0], w[1]),
            });
        }
        let snapshot = Arc::new(Snapshot {
            id: p.id.clone(),
            timestamp: p.timestamp,
            dir: p.dir.clone(),
            has_qrels: p.has_qrels,
            collection: collection.map(str::to_string),
            // Priors are strictly earlier, so they are already built.
            priors: prior_ids.iter().map(|id| built[id].clone()).collect(),
        });
        built.insert(p.id.as_str(), snapshot.clone());
        result.push(snapshot);
    }
    Ok(result)
}

fn detect_cycles(pending: &[Pending], by_id: &HashMap<&str, &Pending>) -> Result<()> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Visiting,
        Done,
    }

    fn visit<'a>(
        id: &'a str,
        by_id: &HashMap<&str, &'a Pending>,
        marks: &mut HashMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
    ) -> Result<()> {
        match marks.get(id) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Visiting) => {
                let start = stack.iter().position(|s| *s == id).unwrap_or(0);
                let mut cycle: Vec<String> = stack[start..].iter().map(|s| s.to_string()).collect();
                cycle.push(id.to_string());
                return Err(Error::LineageCycle(cycle));
            }
            None => {}
        }
        marks.insert(id, Mark::Visiting);
        stack.push(id);
        for prior in by_id[id].prior.iter().flatten() {
            visit(prior.as_str(), by_id, marks, stack)?;
        }
        stack.pop();
        marks.insert(id, Mark::Done);
        Ok(())
    }

    let mut marks = HashMap::new();
    for p in pending {
        visit(p.id.as_str(), by_id, &mut marks, &mut Vec::new())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write_snapshot(root: &Path, id: &str, timestamp: &str, prior: Option<&[&str]>) {
        let dir = root.join(id);
        fs::create_dir_all(&dir).unwrap();
        let mut manifest = serde_json::json!({"snapshot": id, "timestamp": timestamp});
        if let Some(prior) = prior {
            manifest["prior"] = serde_json::json!(prior);
        }
        fs::write(dir.join(MANIFEST_FILE), manifest.to_string()).unwrap();
        fs::write(dir.join(DOCUMENTS_FILE), "{\"id\":\"d1\",\"contents\":\"x\"}\n").unwrap();
        fs::write(dir.join(QUERIES_FILE), "q1\tx\n").unwrap();
    }

    fn write_meta(root: &Path, snapshots: &[&str], subsets: serde_json::Value) {
        let manifest = serde_json::json!({"name": "sci", "snapshots": snapshots, "subsets": subsets});
        fs::write(root.join(MANIFEST_FILE), manifest.to_string()).unwrap();
    }

    fn three(root: &Path) {
        write_snapshot(root, "2023-01", "2023-01", None);
        write_snapshot(root, "2022-07", "2022-07", None);
        write_snapshot(root, "2022-09", "2022-09", None);
        write_meta(
            root,
            &["2023-01", "2022-07", "2022-09"],
            serde_json::json!({"test": ["2022-09", "2023-01"]}),
        );
    }

    fn ids(snapshots: &[Arc<Snapshot>]) -> Vec<&str> {
        snapshots.iter().map(|s| s.id()).collect()
    }

    #[test]
    fn meta_dataset_is_ordered_by_timestamp() {
        let tmp = tempfile::tempdir().unwrap();
        three(tmp.path());
        let meta = load(tmp.path()).unwrap().into_meta().unwrap();
        assert_eq!(ids(meta.datasets()), ["2022-07", "2022-09", "2023-01"]);
        let latest = meta.get("2023-01").unwrap();
        assert_eq!(ids(latest.prior_datasets(None).unwrap()), ["2022-09", "2022-07"]);
        assert_eq!(ids(latest.prior_datasets(Some(1)).unwrap()), ["2022-09"]);
        assert!(meta.get("2022-07").unwrap().prior_datasets(None).unwrap().is_empty());
        assert!(latest.prior_datasets(Some(0)).is_err());
        assert_eq!(latest.timestamp(), Timestamp::month(2023, 1).unwrap());
        assert_eq!(latest.collection(), Some("sci"));
    }

    #[test]
    fn loading_is_deterministic() {
        let tmp = tempfile::tempdir().unwrap();
        three(tmp.path());
        assert_eq!(load(tmp.path()).unwrap(), load(tmp.path()).unwrap());
    }

    #[test]
    fn subsets_keep_full_lineage() {
        let tmp = tempfile::tempdir().unwrap();
        three(tmp.path());
        let meta = load(tmp.path()).unwrap().into_meta().unwrap();
        let test = meta.subset("test").unwrap();
        assert_eq!(ids(test.datasets()), ["2022-09", "2023-01"]);
        assert_eq!(test.datasets()[0].prior_ids(), ["2022-07"]);
        assert!(matches!(meta.subset("missing"), Err(Error::UnknownSubset(_))));
    }

    #[test]
    fn empty_collection() {
        let tmp = tempfile::tempdir().unwrap();
        write_meta(tmp.path(), &[], serde_json::json!({}));
        let meta = load(tmp.path()).unwrap().into_meta().unwrap();
        assert!(meta.datasets().is_empty());
    }

    #[test]
    fn single_snapshot_directory() {
        let tmp = tempfile::tempdir().unwrap();
        write_snapshot(tmp.path(), "2024-11", "2024-11", Some(&[]));
        let s = load(tmp.path().join("2024-11")).unwrap().into_snapshot().unwrap();
        assert_eq!(s.id(), "2024-11");
        assert!(s.prior_ids().is_empty());
        assert_eq!(s.timestamp().to_string(), "2024-11");
    }

    #[test]
    fn single_snapshot_resolves_explicit_sibling_priors() {
        let tmp = tempfile::tempdir().unwrap();
        write_snapshot(tmp.path(), "a", "2024-01", Some(&[]));
        write_snapshot(tmp.path(), "b", "2024-03", Some(&["a"]));
        let s = load(tmp.path().join("b")).unwrap().into_snapshot().unwrap();
        assert_eq!(s.prior_ids(), ["a"]);
    }

    #[test]
    fn cycle_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        write_snapshot(tmp.path(), "a", "2024-01", Some(&["b"]));
        write_snapshot(tmp.path(), "b", "2024-02", Some(&["a"]));
        write_meta(tmp.path(), &["a", "b"], serde_json::json!({}));
        assert!(matches!(load(tmp.path()), Err(Error::LineageCycle(_))));
    }

    #[test]
    fn self_reference_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        write_snapshot(tmp.path(), "a", "2024-01", Some(&["a"]));
        write_meta(tmp.path(), &["a"], serde_json::json!({}));
        assert!(matches!(load(tmp.path()), Err(Error::LineageCycle(_))));
    }

    #[test]
    fn later_explicit_prior_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        write_snapshot(tmp.path(), "a", "2024-01", Some(&["b"]));
        write_snapshot(tmp.path(), "b", "2024-02", Some(&[]));
        write_meta(tmp.path(), &["a", "b"], serde_json::json!({}));
        assert!(matches!(load(tmp.path()), Err(Error::InvalidLineage { .. })));
    }

    #[test]
    fn equal_timestamps_need_explicit_lineage() {
        let tmp = tempfile::tempdir().unwrap();
        write_snapshot(tmp.path(), "a", "2024-01", None);
        write_snapshot(tmp.path(), "b", "2024-01", None);
        write_meta(tmp.path(), &["a", "b"], serde_json::json!({}));
        assert!(matches!(load(tmp.path()), Err(Error::AmbiguousOrder { .. })));

        write_snapshot(tmp.path(), "a", "2024-01", Some(&[]));
        write_snapshot(tmp.path(), "b", "2024-01", Some(&[]));
        let meta = load(tmp.path()).unwrap().into_meta().unwrap();
        assert_eq!(ids(meta.datasets()), ["a", "b"]);
    }

    #[test]
    fn missing_pieces_are_errors() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(matches!(load(tmp.path()), Err(Error::MissingManifest(_))));
        write_meta(tmp.path(), &["nope"], serde_json::json!({}));
        assert!(matches!(load(tmp.path()), Err(Error::MissingSnapshot(_))));
        write_meta(tmp.path(), &[], serde_json::json!({"x": ["nope"]}));
        assert!(matches!(load(tmp.path()), Err(Error::InvalidManifest { .. })));
        assert!(matches!(
            load(tmp.path().join("absent")),
            Err(Error::DatasetNotFound(_))
        ));
    }

    #[test]
    fn qrels_are_optional() {
        let tmp = tempfile::tempdir().unwrap();
        three(tmp.path());
        fs::write(tmp.path().join("2022-07").join(QRELS_FILE), "q1 0 d1 1\n").unwrap();
        let meta = load(tmp.path()).unwrap().into_meta().unwrap();
        assert!(meta.get("2022-07").unwrap().qrels_path().is_some());
        assert!(meta.get("2022-09").unwrap().qrels_path().is_none());
    }

    #[test]
    fn registry_locators() {
        let tmp = tempfile::tempdir().unwrap();
        let root = tmp.path().join("newswire");
        fs::create_dir_all(&root).unwrap();
        three(&root);
        let all = resolve("newswire/*", Some(tmp.path())).unwrap();
        assert_eq!(all.snapshots().len(), 3);
        let test = resolve("newswire/test", Some(tmp.path())).unwrap();
        assert_eq!(test.snapshots().len(), 2);
        let one = resolve("newswire/2022-09", Some(tmp.path())).unwrap();
        assert_eq!(one.into_snapshot().unwrap().prior_ids(), ["2022-07"]);
        assert!(resolve("newswire/zzz", Some(tmp.path())).is_err());
        assert!(resolve("webcrawl/*", Some(tmp.path())).is_err());
        assert!(resolve("newswire/*", None).is_err());
    }
}
