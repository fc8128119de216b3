//! Seeded generator for small longitudinal collections.
//!
//! Every query has a fixed set of relevant documents that stay relevant (with
//! the same grade) in every snapshot, plus keyword-stuffed distractors that are
//! judged non-relevant. Distractors outrank the relevant documents under BM25,
//! so judgments carried over from earlier snapshots have something to fix.
//! The remaining documents are filler. Document ids persist across snapshots;
//! contents are regenerated per snapshot.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::formats::{write_documents, write_queries, Document, Grade, QrelRecord, Qrels, Query};
use crate::snapshot::{Manifest, MetaManifest, SnapshotManifest, Timestamp, DOCUMENTS_FILE, QRELS_FILE, QUERIES_FILE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub name: String,
    pub seed: u64,
    pub snapshots: usize,
    /// Year and month of the first snapshot; later ones follow monthly.
    pub start: (i32, u32),
    pub queries: usize,
    pub docs_per_snapshot: usize,
    pub relevant_per_query: usize,
    pub distractors_per_query: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            name: "synthetic".to_string(),
            seed: 42,
            snapshots: 3,
            start: (2022, 7),
            queries: 10,
            docs_per_snapshot: 200,
            relevant_per_query: 5,
            distractors_per_query: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSnapshot {
    pub id: String,
    pub timestamp: Timestamp,
    pub documents: Vec<Document>,
    pub queries: Vec<Query>,
    pub qrels: Qrels,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCollection {
    pub name: String,
    pub snapshots: Vec<SyntheticSnapshot>,
}

const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];

fn pseudo_words(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut words = Vec::with_capacity(n);
    while words.len() < n {
        let syllables = rng.random_range(2..=3);
        let word: String = (0..syllables)
            .map(|_| format!("{}{}", ONSETS.choose(rng).unwrap(), VOWELS.choose(rng).unwrap()))
            .collect();
        if seen.insert(word.clone()) {
            words.push(word);
        }
    }
    words
}

fn month_after(start: (i32, u32), offset: usize) -> (i32, u32) {
    let zero_based = start.0 as i64 * 12 + start.1 as i64 - 1 + offset as i64;
    ((zero_based / 12) as i32, (zero_based % 12) as u32 + 1)
}

/// Generates a collection; identical configs give identical collections.
pub fn generate(config: &SyntheticConfig) -> Result<SyntheticCollection> {
    let topical = config.queries * (config.relevant_per_query + config.distractors_per_query);
    if config.snapshots == 0 || config.queries == 0 || config.relevant_per_query == 0 {
        return Err(Error::InvalidArgument(
            "snapshots, queries and relevant documents per query must be positive".into(),
        ));
    }
    if topical > config.docs_per_snapshot {
        return Err(Error::InvalidArgument(format!(
            "{} documents per snapshot cannot hold {topical} topical documents",
            config.docs_per_snapshot
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let vocabulary = pseudo_words(&mut rng, 2 * config.queries + 400);
    let (topic_words, filler) = vocabulary.split_at(2 * config.queries);
    let topics: Vec<[&str; 2]> = topic_words.chunks(2).map(|c| [c[0].as_str(), c[1].as_str()]).collect();
    let grades: Vec<Vec<Grade>> = (0..config.queries)
        .map(|_| {
            (0..config.relevant_per_query)
                .map(|_| {
                    if rng.random_bool(0.4) {
                        Grade::HIGHLY_RELEVANT
                    } else {
                        Grade::RELEVANT
                    }
                })
                .collect()
        })
        .collect();
    let width = config.docs_per_snapshot.to_string().len();
    let doc_id = |i: usize| format!("doc{i:0width$}");
    let queries: Vec<Query> = topics
        .iter()
        .enumerate()
        .map(|(q, [a, b])| Query::new(format!("q{:02}", q + 1), format!("{a} {b}")))
        .collect();

    let mut snapshots = Vec::with_capacity(config.snapshots);
    for s in 0..config.snapshots {
        let (year, month) = month_after(config.start, s);
        let timestamp = Timestamp::month(year, month)?;
        let words = |rng: &mut ChaCha8Rng, len: std::ops::Range<usize>| -> Vec<String> {
            let n = rng.random_range(len);
            (0..n).map(|_| filler.choose(rng).unwrap().clone()).collect()
        };
        let mut documents = Vec::with_capacity(config.docs_per_snapshot);
        let mut records = Vec::new();
        let per_query = config.relevant_per_query + config.distractors_per_query;
        for i in 0..config.docs_per_snapshot {
            let mut body: Vec<String>;
            if i < topical {
                let (q, j) = (i / per_query, i % per_query);
                let [a, b] = topics[q];
                if j < config.relevant_per_query {
                    // Long on-topic text mentioning each query term once or twice.
                    body = words(&mut rng, 40..60);
                    for term in [a, b] {
                        for _ in 0..rng.random_range(1..=2) {
                            let at = rng.random_range(0..=body.len());
                            body.insert(at, term.to_string());
                        }
                    }
                    records.push((q, i, grades[q][j]));
                } else {
                    // Short pages repeating the query terms.
                    body = words(&mut rng, 5..10);
                    for term in [a, b] {
                        for _ in 0..rng.random_range(3..=5) {
                            let at = rng.random_range(0..=body.len());
                            body.insert(at, term.to_string());
                        }
                    }
                    records.push((q, i, Grade::NOT_RELEVANT));
                }
            } else {
                body = words(&mut rng, 20..60);
                if rng.random_bool(0.2) {
                    let [a, _] = topics[rng.random_range(0..topics.len())];
                    let at = rng.random_range(0..=body.len());
                    body.insert(at, a.to_string());
                }
            }
            let mut doc = Document::new(doc_id(i), body.join(" "));
            doc.published_date = Some(timestamp);
            documents.push(doc);
        }
        let qrels = Qrels::from_records(records.into_iter().map(|(q, i, rel)| QrelRecord {
            qid: queries[q].qid.clone(),
            doc_id: doc_id(i),
            rel,
        }))?;
        snapshots.push(SyntheticSnapshot {
            id: timestamp.to_string(),
            timestamp,
            documents,
            queries: queries.clone(),
            qrels,
        });
    }
    Ok(SyntheticCollection {
        name: config.name.clone(),
        snapshots,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

impl SyntheticCollection {
    /// Writes the collection under `root/<name>`, with a `test` subset of all
    /// snapshots after the first. Returns the collection directory.
    pub fn write(&self, root: &Path) -> Result<PathBuf> {
        let dir = root.join(&self.name);
        let ids: Vec<String> = self.snapshots.iter().map(|s| s.id.clone()).collect();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut subsets = std::collections::BTreeMap::new();
        if ids.len() > 1 {
            subsets.insert("test".to_string(), ids[1..].to_vec());
        }
        Manifest::Meta(MetaManifest {
            name: self.name.clone(),
            snapshots: ids,
            subsets,
        })
        .write(&dir)?;
        for snap in &self.snapshots {
            let sdir = dir.join(&snap.id);
            std::fs::create_dir_all(&sdir).map_err(|e| Error::io(&sdir, e))?;
            Manifest::Snapshot(SnapshotManifest {
                snapshot: snap.id.clone(),
                timestamp: snap.timestamp.to_string(),
                prior: None,
            })
            .write(&sdir)?;
            let write = |file: &str, body: &dyn Fn(&mut BufWriter<File>) -> std::io::Result<()>| -> Result<()> {
                let path = sdir.join(file);
                let mut out = create(&path)?;
                body(&mut out)
                    .and_then(|_| out.flush())
                    .map_err(|e| Error::io(&path, e))
            };
            write(DOCUMENTS_FILE, &|out| write_documents(out, &snap.documents))?;
            write(QUERIES_FILE, &|out| write_queries(out, &snap.queries))?;
            write(QRELS_FILE, &|out| snap.qrels.write(out))?;
        }
        Ok(dir)
    }
}
