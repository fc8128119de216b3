use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::formats::{Grade, Qrels, Run};
use crate::scalar::{mean, Scalar};

/// Gain assigned to a relevance grade.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Gain {
    /// `gain = grade`
    #[default]
    Linear,
    /// `gain = 2^grade - 1`
    Exponential,
}

impl Gain {
    pub fn of<S: Scalar>(self, grade: Grade) -> S {
        let g = grade.value() as i32;
        match self {
            Gain::Linear => S::from_i32(g).expect("grade representable"),
            Gain::Exponential => S::lit(2.0).powi(g) - S::one(),
        }
    }
}

/// Per-topic scores of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult<S> {
    per_topic: BTreeMap<String, S>,
    mean: S,
    no_relevant: usize,
}

impl<S: Scalar> EvalResult<S> {
    /// Wraps precomputed per-topic scores.
    pub fn from_scores(per_topic: BTreeMap<String, S>, no_relevant: usize) -> Self {
        let mean = mean(per_topic.values().copied());
        Self {
            per_topic,
            mean,
            no_relevant,
        }
    }

    pub fn per_topic(&self) -> &BTreeMap<String, S> {
        &self.per_topic
    }

    pub fn get(&self, qid: &str) -> Option<S> {
        self.per_topic.get(qid).copied()
    }

    pub fn mean(&self) -> S {
        self.mean
    }

    /// Topics without any relevant judgment; they score 0.
    pub fn no_relevant(&self) -> usize {
        self.no_relevant
    }

    pub fn len(&self) -> usize {
        self.per_topic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_topic.is_empty()
    }

    pub fn values(&self) -> Vec<S> {
        self.per_topic.values().copied().collect()
    }
}

fn discount<S: Scalar>(rank: usize) -> S {
    (S::count(rank) + S::one()).log2()
}

/// nDCG@k of one topic from the grades of the ranked documents (rank order)
/// and all judged grades of the topic.
pub fn ndcg_of_topic<S: Scalar>(ranked: &[Grade], judged: &[Grade], k: usize, gain: Gain) -> S {
    let dcg: S = ranked
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| gain.of::<S>(g) / discount(i + 1))
        .sum();
    let mut ideal = judged.to_vec();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: S = ideal
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| gain.of::<S>(g) / discount(i + 1))
        .sum();
    if idcg > S::zero() {
        dcg / idcg
    } else {
        S::zero()
    }
}

/// nDCG@k of every topic present in the qrels or the run. Documents are taken
/// in rank order; unjudged documents count as grade 0. Topics without relevant
/// judgments and topics the run does not answer score 0.
pub fn ndcg_at_k<S: Scalar>(run: &Run, qrels: &Qrels, k: usize, gain: Gain) -> Result<EvalResult<S>> {
    if k == 0 {
        return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
    }
    let ranked = run.by_query();
    let mut topics: Vec<&str> = qrels.topics().chain(ranked.keys().copied()).collect();
    topics.sort_unstable();
    topics.dedup();

    let mut per_topic = BTreeMap::new();
    let mut no_relevant = 0;
    for qid in topics {
        let judged: Vec<Grade> = qrels
            .topic(qid)
            .map(|docs| docs.values().copied().collect())
            .unwrap_or_default();
        if !judged.iter().any(|g| g.value() > 0) {
            no_relevant += 1;
        }
        let grades: Vec<Grade> = ranked
            .get(qid)
            .map(|records| {
                records
                    .iter()
                    .map(|r| qrels.get(qid, &r.doc_id).unwrap_or(Grade::NOT_RELEVANT))
                    .collect()
            })
            .unwrap_or_default();
        per_topic.insert(qid.to_string(), ndcg_of_topic(&grades, &judged, k, gain));
    }
    Ok(EvalResult::from_scores(per_topic, no_relevant))
}
