//! Reranking by relevance labels from prior snapshots.
//!
//! A document's retriever score is multiplied, for every prior snapshot that
//! judged it for the same query, by `(1-λ)²` (grade 0), `λ²` (grade 1) or
//! `λ²·μ` (grade 2). Unjudged pairs contribute 1.

use super::{DataAccess, Ranking, Rerank, Reranker, SnapshotContext};
use crate::error::{Error, Result};
use crate::formats::{Grade, Qrels};
use crate::scalar::Scalar;
use crate::snapshot::Snapshot;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrelBoostConfig<S> {
    lambda: S,
    mu: S,
    memory: Option<usize>,
}

fn check_params<S: Scalar>(lambda: S, mu: S) -> Result<()> {
    if !(lambda > S::zero() && lambda < S::one()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must lie in (0, 1), got {lambda}"
        )));
    }
    let positive = mu > S::zero() && mu.is_finite();
    if !positive {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
    }
    Ok(())
}

impl<S: Scalar> QrelBoostConfig<S> {
    pub fn new(lambda: S, mu: S, memory: Option<usize>) -> Result<Self> {
        check_params(lambda, mu)?;
        if memory == Some(0) {
            return Err(Error::InvalidArgument("memory must be a positive integer".into()));
        }
        Ok(Self { lambda, mu, memory })
    }

    pub fn lambda(&self) -> S {
        self.lambda
    }

    pub fn mu(&self) -> S {
        self.mu
    }

    pub fn memory(&self) -> Option<usize> {
        self.memory
    }

    pub fn factor(&self, history: &[Option<Grade>]) -> S {
        qrel_boost_factor(history, self.lambda, self.mu).expect("validated parameters")
    }
}

impl<S: Scalar> Default for QrelBoostConfig<S> {
    fn default() -> Self {
        Self {
            lambda: S::lit(0.7),
            mu: S::lit(1.5),
            memory: None,
        }
    }
}

/// Multiplicative boost for a judgment history (most recent first; `None`
/// marks an unjudged snapshot).
pub fn qrel_boost_factor<S: Scalar>(history: &[Option<Grade>], lambda: S, mu: S) -> Result<S> {
    check_params(lambda, mu)?;
    let penalty = (S::one() - lambda) * (S::one() - lambda);
    let reward = lambda * lambda;
    Ok(history.iter().flatten().fold(S::one(), |acc, g| {
        acc * match g.value() {
            0 => penalty,
            1 => reward,
            _ => reward * mu,
        }
    }))
}

/// Judgments of the prior snapshots consulted for one snapshot, most recent
/// first. `None` entries are unjudged snapshots.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PriorJudgments {
    priors: Vec<Option<Qrels>>,
}

impl PriorJudgments {
    pub fn new(priors: Vec<Option<Qrels>>) -> Self {
        Self { priors }
    }

    /// Loads judgments of the first `memory` priors of `snapshot`.
    pub fn load(snapshot: &Snapshot, memory: Option<usize>, access: &DataAccess<'_>) -> Result<Self> {
        let priors = snapshot
            .prior_datasets(memory)?
            .iter()
            .map(|p| access.qrels(p))
            .collect::<Result<_>>()?;
        Ok(Self { priors })
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    pub fn priors(&self) -> &[Option<Qrels>] {
        &self.priors
    }

    pub fn judges_topic(&self, qid: &str) -> bool {
        self.priors.iter().flatten().any(|q| q.contains_topic(qid))
    }

    pub fn history(&self, qid: &str, doc_id: &str) -> Vec<Option<Grade>> {
        self.priors
            .iter()
            .map(|q| q.as_ref().and_then(|q| q.get(qid, doc_id)))
            .collect()
    }
}

/// Rescores `ranking` from its original scores and re-sorts it.
pub fn boost_ranking(mut ranking: Ranking, judgments: &PriorJudgments, config: &QrelBoostConfig<f64>) -> Ranking {
    if !judgments.judges_topic(&ranking.qid) {
        return ranking;
    }
    let qid = ranking.qid.clone();
    ranking.rescore(|e| e.score_0 * config.factor(&judgments.history(&qid, &e.doc_id)));
    ranking
}

/// Boosts a ranking of `snapshot` with the judgments of its priors.
pub fn apply_qrel_boost(
    ranking: Ranking,
    snapshot: &Snapshot,
    config: &QrelBoostConfig<f64>,
    access: &DataAccess<'_>,
) -> Result<Ranking> {
    let judgments = PriorJudgments::load(snapshot, config.memory(), access)?;
    Ok(boost_ranking(ranking, &judgments, config))
}

/// Reranker stage wrapping [`boost_ranking`].
#[derive(Debug, Clone)]
pub struct QrelBoost {
    config: QrelBoostConfig<f64>,
}

impl QrelBoost {
    pub fn new(config: QrelBoostConfig<f64>) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &QrelBoostConfig<f64> {
        &self.config
    }
}

struct PreparedBoost {
    judgments: PriorJudgments,
    config: QrelBoostConfig<f64>,
}

impl Rerank for PreparedBoost {
    fn rerank(&self, ranking: Ranking) -> Result<Ranking> {
        Ok(boost_ranking(ranking, &self.judgments, &self.config))
    }
}

impl Reranker for QrelBoost {
    fn name(&self) -> &str {
        "qrel_boost"
    }

    fn prepare(&self, ctx: &SnapshotContext<'_>) -> Result<Box<dyn Rerank>> {
        Ok(Box::new(PreparedBoost {
            judgments: PriorJudgments::load(ctx.snapshot, self.config.memory(), &ctx.access)?,
            config: self.config,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::QrelRecord;
    use proptest::prelude::*;

    fn g(v: u8) -> Option<Grade> {
        Grade::new(v)
    }

    #[test]
    fn worked_factors() {
        let f = |h: &[Option<Grade>], l: f64, m: f64| qrel_boost_factor(h, l, m).unwrap();
        assert!((f(&[g(1)], 0.7, 1.5) - 0.49).abs() < 1e-15);
        assert_eq!(f(&[None, None], 0.7, 1.5), 1.0);
        assert_eq!(f(&[], 0.7, 1.5), 1.0);
        assert!((f(&[g(0), g(1)], 0.7, 1.5) - 0.0441).abs() < 1e-15);
        assert!((f(&[g(2)], 0.7, 1.5) - 0.735).abs() < 1e-15);
        let single: f32 = qrel_boost_factor(&[g(2)], 0.7, 1.5).unwrap();
        assert!((single - 0.735).abs() < 1e-6);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        for (l, m) in [
            (0.0, 1.0),
            (1.0, 1.0),
            (-0.1, 1.0),
            (0.5, 0.0),
            (0.5, -1.0),
            (f64::NAN, 1.0),
        ] {
            assert!(qrel_boost_factor(&[g(1)], l, m).is_err(), "{l} {m}");
            assert!(QrelBoostConfig::new(l, m, None).is_err());
        }
        assert!(QrelBoostConfig::new(0.5, 1.0, Some(0)).is_err());
    }

    fn judgments(records: &[(&str, &str, u8)]) -> PriorJudgments {
        let qrels = Qrels::from_records(records.iter().map(|(q, d, r)| QrelRecord {
            qid: q.to_string(),
            doc_id: d.to_string(),
            rel: Grade::new(*r).unwrap(),
        }))
        .unwrap();
        PriorJudgments::new(vec![Some(qrels)])
    }

    fn ranking() -> Ranking {
        Ranking::from_scores("q", vec![("dA".into(), 10.0), ("dB".into(), 9.0)])
    }

    fn scores(r: &Ranking) -> Vec<(&str, f64)> {
        r.entries().iter().map(|e| (e.doc_id.as_str(), e.score)).collect()
    }

    #[test]
    fn relevant_doc_keeps_order() {
        let cfg = QrelBoostConfig::new(0.9, 1.5, Some(1)).unwrap();
        let out = boost_ranking(ranking(), &judgments(&[("q", "dB", 1)]), &cfg);
        let s = scores(&out);
        assert_eq!(s[0], ("dA", 10.0));
        assert_eq!(s[1].0, "dB");
        assert!((s[1].1 - 7.29).abs() < 1e-12);
        assert_eq!(out.entries()[1].score_0, 9.0);
    }

    #[test]
    fn non_relevant_doc_drops() {
        let cfg = QrelBoostConfig::new(0.9, 1.5, Some(1)).unwrap();
        let out = boost_ranking(ranking(), &judgments(&[("q", "dB", 1), ("q", "dA", 0)]), &cfg);
        let s = scores(&out);
        assert_eq!(s[0].0, "dB");
        assert!((s[0].1 - 7.29).abs() < 1e-12);
        assert_eq!(s[1].0, "dA");
        assert!((s[1].1 - 0.1).abs() < 1e-12);
        assert_eq!(out.entries()[0].rank, 1);
    }

    #[test]
    fn no_priors_or_unjudged_topic_passes_through() {
        let cfg = QrelBoostConfig::new(0.9, 1.5, None).unwrap();
        assert_eq!(boost_ranking(ranking(), &PriorJudgments::default(), &cfg), ranking());
        assert_eq!(
            boost_ranking(ranking(), &judgments(&[("other", "dA", 0)]), &cfg),
            ranking()
        );
    }

    #[test]
    fn grades_order_equal_scores() {
        let cfg = QrelBoostConfig::new(0.8, 1.2, None).unwrap();
        let r = Ranking::from_scores("q", vec![("a".into(), 5.0), ("b".into(), 5.0), ("c".into(), 5.0)]);
        let out = boost_ranking(r, &judgments(&[("q", "a", 0), ("q", "b", 1), ("q", "c", 2)]), &cfg);
        let ids: Vec<&str> = out.entries().iter().map(|e| e.doc_id.as_str()).collect();
        assert_eq!(ids, ["c", "b", "a"]);
    }

    fn direct_product(history: &[Option<u8>], lambda: f64, mu: f64) -> f64 {
        let zeros = history.iter().filter(|h| **h == Some(0)).count() as i32;
        let ones = history.iter().filter(|h| **h == Some(1)).count() as i32;
        let twos = history.iter().filter(|h| **h == Some(2)).count() as i32;
        (1.0 - lambda).powi(2 * zeros) * lambda.powi(2 * (ones + twos)) * mu.powi(twos)
    }

    proptest! {
        #[test]
        fn factor_matches_power_form(
            history in prop::collection::vec(prop::option::of(0u8..3), 0..6),
            lambda in 0.001f64..0.999,
            mu in 0.001f64..3.0,
        ) {
            let grades: Vec<Option<Grade>> = history.iter().map(|h| h.and_then(Grade::new)).collect();
            let got = qrel_boost_factor(&grades, lambda, mu).unwrap();
            let want = direct_product(&history, lambda, mu);
            prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
        }

        #[test]
        fn ties_keep_doc_id_order(lambda in 0.01f64..0.99, grade in prop::option::of(0u8..3)) {
            let cfg = QrelBoostConfig::new(lambda, 1.5, None).unwrap();
            let mut records = Vec::new();
            if let Some(gr) = grade {
                records.push(("q", "x", gr));
                records.push(("q", "y", gr));
            }
            records.push(("q", "z", 1));
            let r = Ranking::from_scores("q", vec![("y".into(), 2.0), ("x".into(), 2.0), ("z".into(), 1.0)]);
            let out = boost_ranking(r, &judgments(&records), &cfg);
            let pos = |id: &str| out.entries().iter().position(|e| e.doc_id == id).unwrap();
            prop_assert!(pos("x") < pos("y"));
        }
    }
}
