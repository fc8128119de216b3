//! Retrieval pipelines over one snapshot.
//!
//! A pipeline is zero or more query rewriters, exactly one retriever and zero
//! or more rerankers, composed with `>>`:
//!
//! ```no_run
//! # use tempir::pipeline::*;
//! # let root = std::path::PathBuf::from("indices");
//! let boosted = Bm25Retriever::new(&root) >> QrelBoost::new(QrelBoostConfig::new(0.7, 1.5, Some(1)).unwrap());
//! let expanded = RelevanceFeedback::new(RfConfig::new(10, Some(1), 1, &root).unwrap()) >> Bm25Retriever::new(&root);
//! ```
//!
//! Stages are prepared once per snapshot (loading prior judgments or indices
//! through [`DataAccess`]) and then applied to each query independently.

mod access;
mod feedback;
mod qrel_boost;
mod retriever;

use std::fmt;
use std::ops::Shr;
use std::sync::Arc;

use rayon::prelude::*;

pub use access::{AccessEvent, AccessLog, AccessObserver, Artifact, DataAccess};
pub use feedback::{expand_query, RelevanceFeedback, RfConfig};
pub use qrel_boost::{apply_qrel_boost, boost_ranking, qrel_boost_factor, PriorJudgments, QrelBoost, QrelBoostConfig};
pub use retriever::Bm25Retriever;

use crate::error::{Error, Result};
use crate::formats::{Query, Run, RunRecord};
use crate::snapshot::Snapshot;

#[derive(Debug, Clone, PartialEq)]
pub struct RankedDoc {
    pub doc_id: String,
    /// Score assigned by the retriever; never changed by rerankers.
    pub score_0: f64,
    pub score: f64,
    pub rank: u32,
}

/// Ranked documents for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub qid: String,
    entries: Vec<RankedDoc>,
}

impl Ranking {
    /// Ranking from retriever output, ordered by score then doc id.
    pub fn from_scores(qid: impl Into<String>, scored: Vec<(String, f64)>) -> Ranking {
        let mut ranking = Ranking {
            qid: qid.into(),
            entries: scored
                .into_iter()
                .map(|(doc_id, score)| RankedDoc {
                    doc_id,
                    score_0: score,
                    score,
                    rank: 0,
                })
                .collect(),
        };
        ranking.resort();
        ranking
    }

    pub fn entries(&self) -> &[RankedDoc] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rescores every entry from its original score and re-sorts.
    pub fn rescore(&mut self, mut f: impl FnMut(&RankedDoc) -> f64) {
        for e in &mut self.entries {
            e.score = f(e);
        }
        self.resort();
    }

    /// Sorts by score descending, doc id ascending, and renumbers ranks.
    fn resort(&mut self) {
        self.entries.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .expect("finite scores")
                .then_with(|| a.doc_id.cmp(&b.doc_id))
        });
        for (i, e) in self.entries.iter_mut().enumerate() {
            e.rank = i as u32 + 1;
        }
    }

    pub fn to_records(&self, tag: &str) -> Vec<RunRecord> {
        self.entries
            .iter()
            .map(|e| RunRecord {
                qid: self.qid.clone(),
                doc_id: e.doc_id.clone(),
                rank: e.rank,
                score: e.score,
                tag: tag.to_string(),
            })
            .collect()
    }
}

/// Everything a stage may consult while preparing for one snapshot.
#[derive(Debug, Clone)]
pub struct SnapshotContext<'a> {
    pub snapshot: &'a Snapshot,
    pub access: DataAccess<'a>,
}

pub trait QueryRewrite: Send + Sync {
    fn rewrite(&self, query: &Query) -> Result<Query>;
}

pub trait Retrieve: Send + Sync {
    fn retrieve(&self, query: &Query, depth: usize) -> Result<Ranking>;
}

pub trait Rerank: Send + Sync {
    fn rerank(&self, ranking: Ranking) -> Result<Ranking>;
}

pub trait Rewriter: Send + Sync {
    fn name(&self) -> &str;
    fn prepare(&self, ctx: &SnapshotContext<'_>) -> Result<Box<dyn QueryRewrite>>;
}

pub trait Retriever: Send + Sync {
    fn name(&self) -> &str;
    fn prepare(&self, ctx: &SnapshotContext<'_>) -> Result<Box<dyn Retrieve>>;
}

pub trait Reranker: Send + Sync {
    fn name(&self) -> &str;
    fn prepare(&self, ctx: &SnapshotContext<'_>) -> Result<Box<dyn Rerank>>;
}

#[derive(Clone)]
pub enum Stage {
    Rewriter(Arc<dyn Rewriter>),
    Retriever(Arc<dyn Retriever>),
    Reranker(Arc<dyn Reranker>),
}

impl Stage {
    pub fn name(&self) -> &str {
        match self {
            Stage::Rewriter(s) => s.name(),
            Stage::Retriever(s) => s.name(),
            Stage::Reranker(s) => s.name(),
        }
    }
}

impl fmt::Debug for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self {
            Stage::Rewriter(_) => "Rewriter",
            Stage::Retriever(_) => "Retriever",
            Stage::Reranker(_) => "Reranker",
        };
        write!(f, "{kind}({})", self.name())
    }
}

/// Ordered stages. Order is checked when the pipeline runs.
#[derive(Debug, Clone, Default)]
pub struct Pipeline {
    stages: Vec<Stage>,
}

impl Pipeline {
    pub fn new(stages: Vec<Stage>) -> Pipeline {
        Pipeline { stages }
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn then(mut self, stage: impl Into<Stage>) -> Pipeline {
        self.stages.push(stage.into());
        self
    }

    /// Checks the `rewriter* retriever reranker*` shape.
    pub fn validate(&self) -> Result<()> {
        let retrievers: Vec<usize> = self
            .stages
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Stage::Retriever(_)))
            .map(|(i, _)| i)
            .collect();
        let [at] = retrievers[..] else {
            return Err(Error::InvalidPipeline(format!(
                "expected exactly one retriever, found {} in `{self}`",
                retrievers.len()
            )));
        };
        if let Some(s) = self.stages[..at].iter().find(|s| !matches!(s, Stage::Rewriter(_))) {
            return Err(Error::InvalidPipeline(format!(
                "`{}` cannot run before the retriever in `{self}`",
                s.name()
            )));
        }
        if let Some(s) = self.stages[at + 1..].iter().find(|s| !matches!(s, Stage::Reranker(_))) {
            return Err(Error::InvalidPipeline(format!(
                "`{}` cannot run after the retriever in `{self}`",
                s.name()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.stages.iter().map(Stage::name).collect();
        f.write_str(&names.join(" >> "))
    }
}

impl From<Stage> for Pipeline {
    fn from(stage: Stage) -> Self {
        Pipeline::new(vec![stage])
    }
}

impl<R: Into<Stage>> Shr<R> for Pipeline {
    type Output = Pipeline;

    fn shr(self, rhs: R) -> Pipeline {
        self.then(rhs)
    }
}

impl<R: Into<Stage>> Shr<R> for Stage {
    type Output = Pipeline;

    fn shr(self, rhs: R) -> Pipeline {
        Pipeline::from(self).then(rhs)
    }
}

macro_rules! stage_impls {
    ($ty:ty, $variant:ident) => {
        impl From<$ty> for Stage {
            fn from(s: $ty) -> Stage {
                Stage::$variant(Arc::new(s))
            }
        }

        impl From<$ty> for Pipeline {
            fn from(s: $ty) -> Pipeline {
                Pipeline::from(Stage::from(s))
            }
        }

        impl<R: Into<Stage>> Shr<R> for $ty {
            type Output = Pipeline;

            fn shr(self, rhs: R) -> Pipeline {
                Pipeline::from(self).then(rhs)
            }
        }
    };
}

stage_impls!(Bm25Retriever, Retriever);
stage_impls!(QrelBoost, Reranker);
stage_impls!(RelevanceFeedback, Rewriter);

/// Runs `pipeline` over every query of `snapshot`, producing a run tagged
/// `tag` with at most `depth` documents per query. Queries are processed in
/// parallel; output is sorted by query id then rank.
pub fn run_pipeline(
    snapshot: &Snapshot,
    pipeline: &Pipeline,
    depth: usize,
    tag: &str,
    observer: Option<Arc<dyn AccessObserver>>,
) -> Result<Run> {
    pipeline.validate()?;
    if depth == 0 {
        return Err(Error::InvalidArgument("retrieval depth must be at least 1".into()));
    }
    let ctx = SnapshotContext {
        snapshot,
        access: DataAccess::new(snapshot, observer),
    };
    let mut rewriters = Vec::new();
    let mut retriever = None;
    let mut rerankers = Vec::new();
    for stage in &pipeline.stages {
        match stage {
            Stage::Rewriter(s) => rewriters.push(s.prepare(&ctx)?),
            Stage::Retriever(s) => retriever = Some(s.prepare(&ctx)?),
            Stage::Reranker(s) => rerankers.push(s.prepare(&ctx)?),
        }
    }
    let retriever = retriever.expect("validated pipeline has a retriever");

    let mut queries = ctx.access.queries(snapshot)?;
    queries.sort_by(|a, b| a.qid.cmp(&b.qid));
    let per_query: Vec<Vec<RunRecord>> = queries
        .par_iter()
        .map(|q| -> Result<Vec<RunRecord>> {
            let mut query = q.clone();
            for r in &rewriters {
                query = r.rewrite(&query)?;
            }
            let mut ranking = retriever.retrieve(&query, depth)?;
            for r in &rerankers {
                ranking = r.rerank(ranking)?;
            }
            Ok(ranking.to_records(tag))
        })
        .collect::<Result<_>>()?;
    Ok(Run::new(per_query.into_iter().flatten().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn bm25() -> Bm25Retriever {
        Bm25Retriever::new(PathBuf::from("x"))
    }

    fn boost() -> QrelBoost {
        QrelBoost::new(QrelBoostConfig::new(0.7, 1.5, None).unwrap())
    }

    fn rf() -> RelevanceFeedback {
        RelevanceFeedback::new(RfConfig::new(3, None, 1, PathBuf::from("x")).unwrap())
    }

    #[test]
    fn composition_and_validation() {
        let p = rf() >> bm25() >> boost();
        assert_eq!(p.to_string(), "rf >> bm25 >> qrel_boost");
        assert!(p.validate().is_ok());
        assert!(Pipeline::from(bm25()).validate().is_ok());
        assert!((bm25() >> rf()).validate().is_err());
        assert!((boost() >> bm25()).validate().is_err());
        assert!((bm25() >> bm25()).validate().is_err());
        assert!(Pipeline::from(boost()).validate().is_err());
        assert!(Pipeline::default().validate().is_err());
    }

    #[test]
    fn ranking_sorts_and_ranks() {
        let r = Ranking::from_scores("q", vec![("b".into(), 1.0), ("a".into(), 1.0), ("c".into(), 3.0)]);
        let ids: Vec<(&str, u32)> = r.entries().iter().map(|e| (e.doc_id.as_str(), e.rank)).collect();
        assert_eq!(ids, [("c", 1), ("a", 2), ("b", 3)]);
    }
}
