//! Binary index format.
//!
//! ```text
//! magic    8 bytes  "TEMPIRIX"
//! version  u32
//! length   u64      payload bytes
//! crc32    u32      of the payload
//! payload:
//!   snapshot id          str
//!   stopwords, stem      u8, u8
//!   n_docs               u64, then per doc: id str, length u32
//!   n_terms              u64, then per term: term str, df u32, df × (doc u32, tf u32)
//! ```
//!
//! Integers are little endian; `str` is a u32 byte length followed by UTF-8.

use std::fs;
use std::path::Path;

use super::{IndexHandle, Tokenizer, TokenizerConfig};
use crate::error::{Error, Result};

pub const FORMAT_MAGIC: &[u8; 8] = b"TEMPIRIX";
pub const FORMAT_VERSION: u32 = 1;
pub const INDEX_FILE: &str = "index.bin";

const HEADER_LEN: usize = 8 + 4 + 8 + 4;

pub(super) fn write(index: &IndexHandle, dir: &Path) -> Result<()> {
    let mut payload = Vec::new();
    put_str(&mut payload, &index.snapshot_id);
    let config = index.tokenizer.config();
    payload.push(config.stopwords as u8);
    payload.push(config.stem as u8);
    payload.extend_from_slice(&(index.doc_ids.len() as u64).to_le_bytes());
    for (id, len) in index.doc_ids.iter().zip(&index.doc_lens) {
        put_str(&mut payload, id);
        payload.extend_from_slice(&len.to_le_bytes());
    }
    payload.extend_from_slice(&(index.terms.len() as u64).to_le_bytes());
    for (term, list) in index.terms.iter().zip(&index.postings) {
        put_str(&mut payload, term);
        payload.extend_from_slice(&(list.len() as u32).to_le_bytes());
        for &(doc, tf) in list {
            payload.extend_from_slice(&doc.to_le_bytes());
            payload.extend_from_slice(&tf.to_le_bytes());
        }
    }

    let mut bytes = Vec::with_capacity(HEADER_LEN + payload.len());
    bytes.extend_from_slice(FORMAT_MAGIC);
    bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&crc32fast::hash(&payload).to_le_bytes());
    bytes.extend_from_slice(&payload);

    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(INDEX_FILE);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    std::io::Write::write_all(&mut tmp, &bytes).map_err(|e| Error::io(&path, e))?;
    tmp.persist(&path).map_err(|e| Error::io(&path, e.error))?;
    Ok(())
}

pub(super) fn read(dir: &Path) -> Result<IndexHandle> {
    let path = dir.join(INDEX_FILE);
    if !path.is_file() {
        return Err(Error::MissingIndex(path));
    }
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let corrupt = |reason: &str| Error::CorruptIndex {
        path: path.clone(),
        reason: reason.to_string(),
    };
    if bytes.len() < HEADER_LEN || &bytes[..8] != FORMAT_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::IndexVersion {
            path,
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let length = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
    let crc = u32::from_le_bytes(bytes[20..24].try_into().expect("4 bytes"));
    let payload = &bytes[HEADER_LEN..];
    if payload.len() as u64 != length {
        return Err(corrupt("payload length mismatch (truncated?)"));
    }
    if crc32fast::hash(payload) != crc {
        return Err(corrupt("checksum mismatch"));
    }

    let mut r = Reader { bytes: payload, pos: 0 };
    let decoded = (|| -> Option<IndexHandle> {
        let snapshot_id = r.str()?;
        let config = TokenizerConfig {
            stopwords: r.u8()? != 0,
            stem: r.u8()? != 0,
        };
        let n_docs = r.u64()? as usize;
        let mut doc_ids = Vec::with_capacity(n_docs.min(payload.len()));
        let mut doc_lens = Vec::with_capacity(n_docs.min(payload.len()));
        for _ in 0..n_docs {
            doc_ids.push(r.str()?);
            doc_lens.push(r.u32()?);
        }
        let n_terms = r.u64()? as usize;
        let mut terms = Vec::with_capacity(n_terms.min(payload.len()));
        let mut postings = Vec::with_capacity(n_terms.min(payload.len()));
        for _ in 0..n_terms {
            terms.push(r.str()?);
            let df = r.u32()? as usize;
            let mut list = Vec::with_capacity(df.min(n_docs));
            for _ in 0..df {
                let doc = r.u32()?;
                if doc as usize >= n_docs {
                    return None;
                }
                list.push((doc, r.u32()?));
            }
            postings.push(list);
        }
        (r.pos == payload.len()).then(|| {
            IndexHandle::assemble(
                snapshot_id,
                Tokenizer::new(config),
                doc_ids,
                doc_lens,
                terms,
                postings,
                Some(dir.to_path_buf()),
            )
        })
    })();
    decoded.ok_or_else(|| corrupt("malformed payload"))
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        let end = self.pos.checked_add(n)?;
        let slice = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(slice)
    }

    fn u8(&mut self) -> Option<u8> {
        self.take(1).map(|b| b[0])
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    fn str(&mut self) -> Option<String> {
        let n = self.u32()? as usize;
        let raw = self.take(n)?;
        String::from_utf8(raw.to_vec()).ok()
    }
}
