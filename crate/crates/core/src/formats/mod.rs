//! On-disk artifacts: JSONL documents, TSV queries, TREC qrels and runs, and a
//! random-access document store.

mod documents;
mod lines;
mod qrels;
mod queries;
mod run;
mod store;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

pub use documents::{parse_documents, write_documents, Document, DocumentReader};
pub use qrels::{parse_qrels, Grade, QrelReader, QrelRecord, Qrels};
pub use queries::{parse_queries, read_queries, write_queries, Query, QueryReader};
pub use run::{format_run, parse_run, validate_run, write_run, Run, RunReader, RunRecord};
pub use store::DocStore;

use crate::error::{Error, Result};

pub(crate) fn open_buffered(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn read_documents_file(path: &Path) -> Result<Vec<Document>> {
    parse_documents(open_buffered(path)?, &path.display().to_string()).collect()
}

pub fn read_queries_file(path: &Path) -> Result<Vec<Query>> {
    read_queries(open_buffered(path)?, &path.display().to_string())
}

pub fn read_qrels_file(path: &Path) -> Result<Qrels> {
    Qrels::from_reader(open_buffered(path)?, &path.display().to_string())
}

pub fn read_run_file(path: &Path) -> Result<Run> {
    Run::from_reader(open_buffered(path)?, &path.display().to_string())
}
