use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use super::lines::Lines;
use crate::error::{Error, Result};

/// Relevance grade in `{0, 1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Grade(u8);

impl Grade {
    pub const NOT_RELEVANT: Grade = Grade(0);
    pub const RELEVANT: Grade = Grade(1);
    pub const HIGHLY_RELEVANT: Grade = Grade(2);
    pub const MAX: u8 = 2;

    pub fn new(value: u8) -> Option<Grade> {
        (value <= Self::MAX).then_some(Grade(value))
    }

    /// Clamps an arbitrary integer label into range. The flag reports whether
    /// clamping changed the value.
    pub fn clamped(value: i64) -> (Grade, bool) {
        let g = value.clamp(0, Self::MAX as i64) as u8;
        (Grade(g), g as i64 != value)
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QrelRecord {
    pub qid: String,
    pub doc_id: String,
    pub rel: Grade,
}

/// Streaming reader over TREC qrels (`qid 0 docid rel`).
pub struct QrelReader<R> {
    lines: Lines<R>,
    clamped: usize,
}

impl<R> QrelReader<R> {
    /// Number of labels clamped into `{0, 1, 2}` so far.
    pub fn clamped(&self) -> usize {
        self.clamped
    }
}

impl<R: BufRead> Iterator for QrelReader<R> {
    type Item = Result<QrelRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        let (line, text) = match self.lines.next()? {
            Ok(l) => l,
            Err(e) => return Some(Err(e)),
        };
        let source = self.lines.source();
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 4 {
            return Some(Err(Error::parse(
                source,
                line,
                format!("expected 4 fields, found {}", fields.len()),
            )));
        }
        let Ok(raw) = fields[3].parse::<i64>() else {
            return Some(Err(Error::parse(
                source,
                line,
                format!("non-integer relevance {:?}", fields[3]),
            )));
        };
        let (rel, changed) = Grade::clamped(raw);
        if changed {
            self.clamped += 1;
        }
        Some(Ok(QrelRecord {
            qid: fields[0].to_string(),
            doc_id: fields[2].to_string(),
            rel,
        }))
    }
}

pub fn parse_qrels<R: BufRead>(reader: R, source: &str) -> QrelReader<R> {
    QrelReader {
        lines: Lines::new(reader, source),
        clamped: 0,
    }
}

/// Judgments of one snapshot, keyed by query then document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, Grade>>,
    clamped: usize,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_reader<R: BufRead>(reader: R, source: &str) -> Result<Qrels> {
        let mut parser = parse_qrels(reader, source);
        let mut qrels = Qrels::new();
        for record in parser.by_ref() {
            qrels.insert(record?)?;
        }
        qrels.clamped = parser.clamped();
        if qrels.clamped > 0 {
            log::warn!("{source}: clamped {} relevance labels into 0..=2", qrels.clamped);
        }
        Ok(qrels)
    }

    pub fn from_records(records: impl IntoIterator<Item = QrelRecord>) -> Result<Qrels> {
        let mut qrels = Qrels::new();
        for r in records {
            qrels.insert(r)?;
        }
        Ok(qrels)
    }

    /// Adds a judgment; a repeated `(qid, doc_id)` pair is an error.
    pub fn insert(&mut self, record: QrelRecord) -> Result<()> {
        let docs = self.judgments.entry(record.qid.clone()).or_default();
        if docs.contains_key(&record.doc_id) {
            return Err(Error::DuplicateId {
                kind: "judgment",
                id: format!("{} {}", record.qid, record.doc_id),
            });
        }
        docs.insert(record.doc_id, record.rel);
        Ok(())
    }

    pub fn get(&self, qid: &str, doc_id: &str) -> Option<Grade> {
        self.judgments.get(qid).and_then(|d| d.get(doc_id)).copied()
    }

    pub fn topic(&self, qid: &str) -> Option<&BTreeMap<String, Grade>> {
        self.judgments.get(qid)
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn contains_topic(&self, qid: &str) -> bool {
        self.judgments.contains_key(qid)
    }

    pub fn clamped(&self) -> usize {
        self.clamped
    }

    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn records(&self) -> impl Iterator<Item = QrelRecord> + '_ {
        self.judgments.iter().flat_map(|(qid, docs)| {
            docs.iter().map(move |(doc, rel)| QrelRecord {
                qid: qid.clone(),
                doc_id: doc.clone(),
                rel: *rel,
            })
        })
    }

    /// Writes `qid 0 docid rel` lines sorted by query then document.
    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for r in self.records() {
            writeln!(out, "{} 0 {} {}", r.qid, r.doc_id, r.rel)?;
        }
        Ok(())
    }
}
