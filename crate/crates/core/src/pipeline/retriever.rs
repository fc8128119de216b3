use std::path::{Path, PathBuf};

use super::{Ranking, Retrieve, Retriever, SnapshotContext};
use crate::error::Result;
use crate::formats::Query;
use crate::index::{Bm25Params, IndexHandle};

/// BM25 over the current snapshot's own index in `indices_root`.
#[derive(Debug, Clone)]
pub struct Bm25Retriever {
    indices_root: PathBuf,
    params: Bm25Params<f64>,
}

impl Bm25Retriever {
    pub fn new(indices_root: impl AsRef<Path>) -> Self {
        Self {
            indices_root: indices_root.as_ref().to_path_buf(),
            params: Bm25Params::default(),
        }
    }

    pub fn with_params(mut self, params: Bm25Params<f64>) -> Self {
        self.params = params;
        self
    }
}

struct PreparedBm25 {
    index: IndexHandle,
    params: Bm25Params<f64>,
}

impl Retrieve for PreparedBm25 {
    fn retrieve(&self, query: &Query, depth: usize) -> Result<Ranking> {
        let hits = self.index.search(&query.text, depth, &self.params)?;
        Ok(Ranking::from_scores(query.qid.clone(), hits))
    }
}

impl Retriever for Bm25Retriever {
    fn name(&self) -> &str {
        "bm25"
    }

    fn prepare(&self, ctx: &SnapshotContext<'_>) -> Result<Box<dyn Retrieve>> {
        let index = ctx.access.index(ctx.snapshot, &self.indices_root)?;
        Ok(Box::new(PreparedBm25 {
            index,
            params: self.params,
        }))
    }
}
