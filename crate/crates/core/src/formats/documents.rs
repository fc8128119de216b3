use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::lines::Lines;
use crate::error::{Error, Result};
use crate::snapshot::Timestamp;

/// A document of one snapshot's corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub contents: String,
    pub published_date: Option<Timestamp>,
    pub updated_date: Option<Timestamp>,
}

impl Document {
    pub fn new(id: impl Into<String>, contents: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            contents: contents.into(),
            published_date: None,
            updated_date: None,
        }
    }
}

#[derive(Deserialize)]
struct RawDocument {
    id: Option<String>,
    contents: Option<String>,
    #[serde(rename = "publishedDate")]
    published_date: Option<String>,
    #[serde(rename = "updatedDate")]
    updated_date: Option<String>,
}

#[derive(Serialize)]
struct OutDocument<'a> {
    id: &'a str,
    contents: &'a str,
    #[serde(rename = "publishedDate", skip_serializing_if = "Option::is_none")]
    published_date: Option<String>,
    #[serde(rename = "updatedDate", skip_serializing_if = "Option::is_none")]
    updated_date: Option<String>,
}

/// Parses one JSONL line.
pub(crate) fn parse_document_line(text: &str, source: &str, line: usize) -> Result<Document> {
    let raw: RawDocument =
        serde_json::from_str(text).map_err(|e| Error::parse(source, line, format!("malformed JSON: {e}")))?;
    let id = raw.id.ok_or_else(|| Error::parse(source, line, "missing `id`"))?;
    if id.is_empty() {
        return Err(Error::parse(source, line, "empty `id`"));
    }
    let contents = raw
        .contents
        .ok_or_else(|| Error::parse(source, line, "missing `contents`"))?;
    let date = |field: &str, value: Option<String>| -> Result<Option<Timestamp>> {
        value
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::parse(source, line, format!("invalid `{field}` {v:?}")))
            })
            .transpose()
    };
    Ok(Document {
        id,
        contents,
        published_date: date("publishedDate", raw.published_date)?,
        updated_date: date("updatedDate", raw.updated_date)?,
    })
}

/// Streaming reader over a `documents.jsonl` file.
pub struct DocumentReader<R> {
    lines: Lines<R>,
}

impl<R: BufRead> Iterator for DocumentReader<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        let (line, text) = match self.lines.next()? {
            Ok(l) => l,
            Err(e) => return Some(Err(e)),
        };
        Some(parse_document_line(&text, self.lines.source(), line))
    }
}

/// Parses newline-delimited JSON documents in file order. Unknown keys are ignored.
pub fn parse_documents<R: BufRead>(reader: R, source: &str) -> DocumentReader<R> {
    DocumentReader {
        lines: Lines::new(reader, source),
    }
}

pub(crate) fn document_json(doc: &Document) -> String {
    serde_json::to_string(&OutDocument {
        id: &doc.id,
        contents: &doc.contents,
        published_date: doc.published_date.map(|t| t.to_string()),
        updated_date: doc.updated_date.map(|t| t.to_string()),
    })
    .expect("document serializes")
}

pub fn write_documents<'a, W: Write>(out: &mut W, docs: impl IntoIterator<Item = &'a Document>) -> std::io::Result<()> {
    for doc in docs {
        writeln!(out, "{}", document_json(doc))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Vec<Result<Document>> {
        parse_documents(text.as_bytes(), "docs").collect()
    }

    #[test]
    fn reads_dates_and_ignores_unknown_keys() {
        let docs = parse(
            "{\"id\":\"d1\",\"contents\":\"x\",\"publishedDate\":\"2016-02-10T00:00:00\",\"url\":\"u\"}\n{\"id\":\"d2\",\"contents\":\"y\"}\n",
        );
        let d1 = docs[0].as_ref().unwrap();
        assert_eq!(d1.published_date.unwrap().to_string(), "2016-02-10T00:00:00");
        assert_eq!(d1.updated_date, None);
        let d2 = docs[1].as_ref().unwrap();
        assert_eq!((d2.id.as_str(), d2.published_date), ("d2", None));
    }

    #[test]
    fn positioned_errors() {
        let docs = parse("{\"id\":\"d1\",\"contents\":\"x\"}\nnot json\n");
        assert!(docs[0].is_ok());
        match &docs[1] {
            Err(Error::Parse { line, .. }) => assert_eq!(*line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse("{\"contents\":\"x\"}").pop().unwrap().is_err());
        assert!(parse("{\"id\":\"d\"}").pop().unwrap().is_err());
        assert!(parse("{\"id\":\"d\",\"contents\":\"x\",\"updatedDate\":\"yesterday\"}")
            .pop()
            .unwrap()
            .is_err());
    }

    #[test]
    fn invalid_utf8_is_an_error() {
        let bytes: &[u8] = b"{\"id\":\"d\",\"contents\":\"\xff\"}\n";
        let docs: Vec<_> = parse_documents(bytes, "docs").collect();
        assert!(matches!(docs[0], Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn write_then_parse() {
        let mut doc = Document::new("d\"1", "tab\tand \"quotes\"");
        doc.updated_date = Some("2024-02-29T10:01:57".parse().unwrap());
        let mut out = Vec::new();
        write_documents(&mut out, [&doc]).unwrap();
        let back: Vec<_> = parse_documents(out.as_slice(), "docs").collect::<Result<_>>().unwrap();
        assert_eq!(back, vec![doc]);
    }
}
