use std::collections::HashSet;
use std::io::{BufRead, Write};

use super::lines::Lines;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    pub qid: String,
    pub text: String,
}

impl Query {
    pub fn new(qid: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            qid: qid.into(),
            text: text.into(),
        }
    }
}

pub struct QueryReader<R> {
    lines: Lines<R>,
}

impl<R: BufRead> Iterator for QueryReader<R> {
    type Item = Result<Query>;

    fn next(&mut self) -> Option<Self::Item> {
        let (line, text) = match self.lines.next()? {
            Ok(l) => l,
            Err(e) => return Some(Err(e)),
        };
        let source = self.lines.source();
        Some(match text.split_once('\t') {
            None => Err(Error::parse(source, line, "expected `qid<TAB>text`")),
            Some(("", _)) => Err(Error::parse(source, line, "empty qid")),
            Some((_, body)) if body.trim().is_empty() => Err(Error::parse(source, line, "empty query text")),
            Some((qid, body)) => Ok(Query::new(qid, body)),
        })
    }
}

/// Parses `qid<TAB>text` lines.
pub fn parse_queries<R: BufRead>(reader: R, source: &str) -> QueryReader<R> {
    QueryReader {
        lines: Lines::new(reader, source),
    }
}

/// Reads all queries, rejecting duplicate qids.
pub fn read_queries<R: BufRead>(reader: R, source: &str) -> Result<Vec<Query>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for q in parse_queries(reader, source) {
        let q = q?;
        if !seen.insert(q.qid.clone()) {
            return Err(Error::DuplicateId {
                kind: "query",
                id: q.qid,
            });
        }
        out.push(q);
    }
    Ok(out)
}

pub fn write_queries<'a, W: Write>(out: &mut W, queries: impl IntoIterator<Item = &'a Query>) -> std::io::Result<()> {
    for q in queries {
        writeln!(out, "{}\t{}", q.qid, q.text)?;
    }
    Ok(())
}
