//! Query expansion with terms from documents judged relevant in prior snapshots.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use super::{DataAccess, QueryRewrite, Rewriter, SnapshotContext};
use crate::error::{Error, Result};
use crate::formats::{Grade, Query};
use crate::index::IndexHandle;
use crate::snapshot::Snapshot;

#[derive(Debug, Clone, PartialEq)]
pub struct RfConfig {
    k: usize,
    memory: Option<usize>,
    min_rel: Grade,
    indices_root: PathBuf,
}

impl RfConfig {
    /// `k` expansion terms from documents with grade at least `min_rel`
    /// (1 or 2) in the first `memory` priors.
    pub fn new(k: usize, memory: Option<usize>, min_rel: u8, indices_root: impl AsRef<Path>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "number of expansion terms must be at least 1".into(),
            ));
        }
        if memory == Some(0) {
            return Err(Error::InvalidArgument("memory must be a positive integer".into()));
        }
        let min_rel = match min_rel {
            1 | 2 => Grade::new(min_rel).expect("valid grade"),
            other => return Err(Error::InvalidArgument(format!("min_rel must be 1 or 2, got {other}"))),
        };
        Ok(Self {
            k,
            memory,
            min_rel,
            indices_root: indices_root.as_ref().to_path_buf(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn memory(&self) -> Option<usize> {
        self.memory
    }

    pub fn min_rel(&self) -> Grade {
        self.min_rel
    }

    pub fn indices_root(&self) -> &Path {
        &self.indices_root
    }
}

/// Feedback material for one snapshot: relevant prior documents per query and
/// the index of the most recent prior.
struct Feedback {
    relevant: BTreeMap<String, BTreeSet<String>>,
    index: Option<IndexHandle>,
    k: usize,
}

impl Feedback {
    fn load(snapshot: &Snapshot, config: &RfConfig, access: &DataAccess<'_>) -> Result<Feedback> {
        let priors = snapshot.prior_datasets(config.memory)?;
        let mut relevant: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for prior in priors {
            let Some(qrels) = access.qrels(prior)? else {
                continue;
            };
            for r in qrels.records().filter(|r| r.rel >= config.min_rel) {
                relevant.entry(r.qid).or_default().insert(r.doc_id);
            }
        }
        // Term statistics come from the most recent prior even when relevant
        // documents were gathered from older ones.
        let index = match priors.first() {
            Some(latest) if !relevant.is_empty() => Some(access.index(latest, &config.indices_root)?),
            _ => None,
        };
        Ok(Feedback {
            relevant,
            index,
            k: config.k,
        })
    }

    fn expand(&self, query: &Query) -> Result<Query> {
        let (Some(docs), Some(index)) = (self.relevant.get(&query.qid), &self.index) else {
            return Ok(query.clone());
        };
        let exclude: HashSet<String> = index.tokenizer().tokenize(&query.text).into_iter().collect();
        let selection = index.tfidf_top_terms(docs.iter().map(String::as_str), self.k, &exclude)?;
        if selection.terms.is_empty() {
            return Ok(query.clone());
        }
        let mut text = query.text.clone();
        for (term, _) in &selection.terms {
            text.push(' ');
            text.push_str(term);
        }
        Ok(Query::new(query.qid.clone(), text))
    }
}

impl QueryRewrite for Feedback {
    fn rewrite(&self, query: &Query) -> Result<Query> {
        self.expand(query)
    }
}

/// Expands `query` for `snapshot` with terms of previously relevant documents.
pub fn expand_query(query: &Query, snapshot: &Snapshot, config: &RfConfig, access: &DataAccess<'_>) -> Result<Query> {
    Feedback::load(snapshot, config, access)?.expand(query)
}

/// Rewriter stage wrapping [`expand_query`].
#[derive(Debug, Clone)]
pub struct RelevanceFeedback {
    config: RfConfig,
}

impl RelevanceFeedback {
    pub fn new(config: RfConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &RfConfig {
        &self.config
    }
}

impl Rewriter for RelevanceFeedback {
    fn name(&self) -> &str {
        "rf"
    }

    fn prepare(&self, ctx: &SnapshotContext<'_>) -> Result<Box<dyn QueryRewrite>> {
        Ok(Box::new(Feedback::load(ctx.snapshot, &self.config, &ctx.access)?))
    }
}
