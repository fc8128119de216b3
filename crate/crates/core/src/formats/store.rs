use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::UNIX_EPOCH;

use serde::{Deserialize, Serialize};

use super::documents::{parse_document_line, Document};
use crate::error::{Error, Result};
use crate::snapshot::Snapshot;

const OFFSETS_VERSION: u32 = 1;

/// Byte-offset index persisted next to the corpus as `<corpus>.offsets.json`.
#[derive(Debug, Serialize, Deserialize)]
struct OffsetsFile {
    version: u32,
    corpus_len: u64,
    corpus_mtime_ns: u128,
    /// `(doc_id, offset, length)` in file order.
    entries: Vec<(String, u64, u64)>,
}

/// Random access to a snapshot's documents.
///
/// The first open scans the corpus and persists line offsets beside it; later
/// opens reuse them while the corpus length and modification time match.
#[derive(Debug)]
pub struct DocStore {
    path: PathBuf,
    order: Vec<(String, u64, u64)>,
    positions: HashMap<String, usize>,
    file: Mutex<File>,
}

impl DocStore {
    pub fn open(corpus: impl AsRef<Path>) -> Result<DocStore> {
        let path = corpus.as_ref().to_path_buf();
        let meta = std::fs::metadata(&path).map_err(|e| Error::io(&path, e))?;
        let len = meta.len();
        let mtime = meta
            .modified()
            .ok()
            .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
            .map(|d| d.as_nanos())
            .unwrap_or(0);
        let cache = offsets_path(&path);
        let entries = match read_offsets(&cache) {
            Some(f) if f.version == OFFSETS_VERSION && f.corpus_len == len && f.corpus_mtime_ns == mtime => f.entries,
            _ => {
                let entries = scan(&path)?;
                let file = OffsetsFile {
                    version: OFFSETS_VERSION,
                    corpus_len: len,
                    corpus_mtime_ns: mtime,
                    entries,
                };
                // A read-only corpus directory only costs the cache.
                if let Err(e) = write_offsets(&cache, &file) {
                    log::warn!("could not persist {}: {e}", cache.display());
                }
                file.entries
            }
        };
        let mut positions = HashMap::with_capacity(entries.len());
        for (i, (id, _, _)) in entries.iter().enumerate() {
            if positions.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "document",
                    id: id.clone(),
                });
            }
        }
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        Ok(DocStore {
            path,
            order: entries,
            positions,
            file: Mutex::new(file),
        })
    }

    pub fn for_snapshot(snapshot: &Snapshot) -> Result<DocStore> {
        DocStore::open(snapshot.documents_path())
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.positions.contains_key(doc_id)
    }

    /// Looks a document up by id; `Ok(None)` when absent.
    pub fn get(&self, doc_id: &str) -> Result<Option<Document>> {
        match self.positions.get(doc_id) {
            Some(&i) => self.read_at(i).map(Some),
            None => Ok(None),
        }
    }

    /// All documents in file order.
    pub fn iter(&self) -> impl Iterator<Item = Result<Document>> + '_ {
        (0..self.order.len()).map(move |i| self.read_at(i))
    }

    fn read_at(&self, i: usize) -> Result<Document> {
        let (_, offset, length) = &self.order[i];
        let mut buf = vec![0u8; *length as usize];
        {
            let mut file = self.file.lock().expect("document store lock poisoned");
            file.seek(SeekFrom::Start(*offset))
                .and_then(|_| file.read_exact(&mut buf))
                .map_err(|e| Error::io(&self.path, e))?;
        }
        let source = self.path.display().to_string();
        let text =
            std::str::from_utf8(&buf).map_err(|e| Error::parse(&source, i + 1, format!("invalid UTF-8: {e}")))?;
        parse_document_line(text.trim_end_matches(['\n', '\r']), &source, i + 1)
    }
}

fn offsets_path(corpus: &Path) -> PathBuf {
    let mut name = corpus.file_name().unwrap_or_default().to_os_string();
    name.push(".offsets.json");
    corpus.with_file_name(name)
}

fn read_offsets(path: &Path) -> Option<OffsetsFile> {
    let bytes = std::fs::read(path).ok()?;
    serde_json::from_slice(&bytes).ok()
}

fn write_offsets(path: &Path, file: &OffsetsFile) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    serde_json::to_writer(&mut tmp, file)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn scan(path: &Path) -> Result<Vec<(String, u64, u64)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let source = path.display().to_string();
    let mut reader = BufReader::new(file);
    let mut entries = Vec::new();
    let mut offset = 0u64;
    let mut buf = Vec::new();
    let mut line = 0usize;
    loop {
        buf.clear();
        let n = std::io::BufRead::read_until(&mut reader, b'\n', &mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        line += 1;
        let text = std::str::from_utf8(&buf)
            .map_err(|e| Error::parse(&source, line, format!("invalid UTF-8: {e}")))?
            .trim_end_matches(['\n', '\r']);
        let doc = parse_document_line(text, &source, line)?;
        entries.push((doc.id, offset, n as u64));
        offset += n as u64;
    }
    Ok(entries)
}
