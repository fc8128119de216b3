use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use super::lines::Lines;
use crate::error::{Error, Result};

/// One line of a TREC run: `qid Q0 docid rank score tag`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub qid: String,
    pub doc_id: String,
    pub rank: u32,
    pub score: f64,
    pub tag: String,
}

pub struct RunReader<R> {
    lines: Lines<R>,
}

impl<R: BufRead> Iterator for RunReader<R> {
    type Item = Result<RunRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        let (line, text) = match self.lines.next()? {
            Ok(l) => l,
            Err(e) => return Some(Err(e)),
        };
        Some(parse_run_line(&text, self.lines.source(), line))
    }
}

fn parse_run_line(text: &str, source: &str, line: usize) -> Result<RunRecord> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(Error::parse(
            source,
            line,
            format!("expected 6 fields, found {}", fields.len()),
        ));
    }
    let rank: u32 = fields[3]
        .parse()
        .map_err(|_| Error::parse(source, line, format!("non-integer rank {:?}", fields[3])))?;
    if rank == 0 {
        return Err(Error::parse(source, line, "rank must be positive"));
    }
    let score: f64 = fields[4]
        .parse()
        .map_err(|_| Error::parse(source, line, format!("invalid score {:?}", fields[4])))?;
    if !score.is_finite() {
        return Err(Error::parse(source, line, "score must be finite"));
    }
    Ok(RunRecord {
        qid: fields[0].to_string(),
        doc_id: fields[2].to_string(),
        rank,
        score,
        tag: fields[5].to_string(),
    })
}

pub fn parse_run<R: BufRead>(reader: R, source: &str) -> RunReader<R> {
    RunReader {
        lines: Lines::new(reader, source),
    }
}

/// A ranked result list per query.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run {
    records: Vec<RunRecord>,
}

impl Run {
    pub fn new(records: Vec<RunRecord>) -> Run {
        Run { records }
    }

    pub fn from_reader<R: BufRead>(reader: R, source: &str) -> Result<Run> {
        parse_run(reader, source).collect::<Result<Vec<_>>>().map(Run::new)
    }

    pub fn records(&self) -> &[RunRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<RunRecord> {
        self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records grouped by query and sorted by rank.
    pub fn by_query(&self) -> BTreeMap<&str, Vec<&RunRecord>> {
        let mut out: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
        for r in &self.records {
            out.entry(r.qid.as_str()).or_default().push(r);
        }
        for list in out.values_mut() {
            list.sort_by_key(|r| r.rank);
        }
        out
    }
}

/// Checks that every query has ranks `1..n`, unique documents and
/// non-increasing scores.
pub fn validate_run(records: &[RunRecord]) -> Result<()> {
    let mut by_query: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        if !r.score.is_finite() {
            return Err(Error::InvalidRun(format!(
                "non-finite score for {} {}",
                r.qid, r.doc_id
            )));
        }
        by_query.entry(r.qid.as_str()).or_default().push(r);
    }
    for (qid, mut list) in by_query {
        list.sort_by_key(|r| r.rank);
        let mut docs = HashSet::new();
        for (i, r) in list.iter().enumerate() {
            if r.rank as usize != i + 1 {
                return Err(Error::InvalidRun(format!(
                    "query {qid}: expected rank {}, found {}",
                    i + 1,
                    r.rank
                )));
            }
            if !docs.insert(r.doc_id.as_str()) {
                return Err(Error::InvalidRun(format!(
                    "query {qid}: document {} repeated",
                    r.doc_id
                )));
            }
            if i > 0 && r.score > list[i - 1].score {
                return Err(Error::InvalidRun(format!(
                    "query {qid}: score increases at rank {}",
                    r.rank
                )));
            }
        }
    }
    Ok(())
}

/// Writes records sorted by `(qid, rank)` with scores at six decimals, all
/// tagged `tag`.
pub fn write_run<W: Write>(out: &mut W, records: &[RunRecord], tag: &str) -> Result<()> {
    if tag.is_empty() || tag.chars().any(char::is_whitespace) {
        return Err(Error::InvalidRun(format!("invalid run tag {tag:?}")));
    }
    validate_run(records)?;
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.qid.cmp(&b.qid).then(a.rank.cmp(&b.rank)));
    let io = |e| Error::io("<run output>", e);
    for r in sorted {
        writeln!(out, "{} Q0 {} {} {:.6} {}", r.qid, r.doc_id, r.rank, r.score, tag).map_err(io)?;
    }
    Ok(())
}

/// [`write_run`] into a byte buffer.
pub fn format_run(records: &[RunRecord], tag: &str) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_run(&mut out, records, tag)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(qid: &str, doc: &str, rank: u32, score: f64) -> RunRecord {
        RunRecord {
            qid: qid.into(),
            doc_id: doc.into(),
            rank,
            score,
            tag: "bm25".into(),
        }
    }

    #[test]
    fn parses_trec_line() {
        let r = parse_run("q1 Q0 d7 1 12.500000 bm25".as_bytes(), "run")
            .next()
            .unwrap()
            .unwrap();
        assert_eq!(r, rec("q1", "d7", 1, 12.5));
    }

    #[test]
    fn rejects_bad_fields() {
        for bad in [
            "q1 Q0 d7 1 12.5",
            "q1 Q0 d7 x 1.0 t",
            "q1 Q0 d7 0 1.0 t",
            "q1 Q0 d7 1 abc t",
        ] {
            assert!(parse_run(bad.as_bytes(), "run").next().unwrap().is_err(), "{bad}");
        }
    }

    #[test]
    fn write_sorts_and_formats() {
        let records = vec![rec("q2", "a", 1, 3.0), rec("q1", "c", 2, 1.25), rec("q1", "b", 1, 2.0)];
        let text = String::from_utf8(format_run(&records, "sys").unwrap()).unwrap();
        assert_eq!(
            text,
            "q1 Q0 b 1 2.000000 sys\nq1 Q0 c 2 1.250000 sys\nq2 Q0 a 1 3.000000 sys\n"
        );
    }

    #[test]
    fn write_rejects_gaps_and_duplicates() {
        assert!(format_run(&[rec("q1", "a", 1, 2.0), rec("q1", "b", 3, 1.0)], "t").is_err());
        assert!(format_run(&[rec("q1", "a", 1, 2.0), rec("q1", "a", 2, 1.0)], "t").is_err());
        assert!(format_run(&[rec("q1", "a", 1, 1.0), rec("q1", "b", 2, 2.0)], "t").is_err());
        assert!(format_run(&[rec("q1", "a", 1, 1.0)], "has space").is_err());
    }

    fn canonical_run() -> impl Strategy<Value = Vec<RunRecord>> {
        prop::collection::vec(prop::collection::vec(0u32..5_000_000, 1..6), 1..5).prop_map(|queries| {
            let mut out = Vec::new();
            for (qi, mut scores) in queries.into_iter().enumerate() {
                scores.sort_unstable_by(|a, b| b.cmp(a));
                for (i, s) in scores.into_iter().enumerate() {
                    out.push(RunRecord {
                        qid: format!("q{qi}"),
                        doc_id: format!("d{i}"),
                        rank: i as u32 + 1,
                        score: s as f64 / 1000.0,
                        tag: "t".into(),
                    });
                }
            }
            out
        })
    }

    proptest! {
        #[test]
        fn parse_inverts_write(records in canonical_run()) {
            let bytes = format_run(&records, "t").unwrap();
            let back = Run::from_reader(bytes.as_slice(), "run").unwrap();
            prop_assert_eq!(back.into_records(), records);
        }
    }
}
