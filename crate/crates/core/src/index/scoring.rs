//! Term weighting formulas shared by retrieval and relevance feedback.

use crate::scalar::Scalar;

/// BM25 free parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params<S> {
    pub k1: S,
    pub b: S,
}

impl<S: Scalar> Default for Bm25Params<S> {
    fn default() -> Self {
        Self {
            k1: S::lit(1.2),
            b: S::lit(0.75),
        }
    }
}

impl<S: Scalar> Bm25Params<S> {
    /// `ln((N - df + 0.5) / (df + 0.5) + 1)`, positive for every `df <= N`.
    pub fn idf(&self, n_docs: usize, df: usize) -> S {
        let half = S::lit(0.5);
        let n = S::count(n_docs);
        let df = S::count(df);
        ((n - df + half) / (df + half) + S::one()).ln()
    }

    /// Contribution of one matched term to a document's score.
    pub fn term_score(&self, tf: u32, df: usize, n_docs: usize, doc_len: u32, avg_doc_len: S) -> S {
        let tf = S::from_u32(tf).expect("tf representable");
        let ratio = if avg_doc_len > S::zero() {
            S::from_u32(doc_len).expect("length representable") / avg_doc_len
        } else {
            S::zero()
        };
        let norm = self.k1 * (S::one() - self.b + self.b * ratio);
        self.idf(n_docs, df) * tf * (self.k1 + S::one()) / (tf + norm)
    }
}

/// Summed term frequency times `ln(N / df)`.
pub fn tfidf_weight<S: Scalar>(tf_sum: u64, df: usize, n_docs: usize) -> S {
    let tf = S::from_u64(tf_sum).expect("tf representable");
    tf * (S::count(n_docs) / S::count(df)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_score() {
        // N=2, df=1, tf=1, dl=2, avgdl=2.5
        let idf = (1.5f64 / 1.5 + 1.0).ln();
        let expected = idf * 2.2 / (1.0 + 1.2 * (0.25 + 0.75 * 0.8));
        let got = Bm25Params::<f64>::default().term_score(1, 1, 2, 2, 2.5);
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.7549127709).abs() < 1e-9);
    }

    #[test]
    fn idf_is_positive() {
        let p = Bm25Params::<f32>::default();
        for n in 1..50 {
            for df in 1..=n {
                assert!(p.idf(n, df) > 0.0);
            }
        }
    }

    #[test]
    fn strictly_increasing_in_tf() {
        let p = Bm25Params::<f64>::default();
        for dl in [1u32, 5, 40] {
            for avg in [0.5, 3.0, 20.0] {
                let mut last = 0.0;
                for tf in 1..30 {
                    let s = p.term_score(tf, 3, 10, dl, avg);
                    assert!(s > last, "tf={tf} dl={dl} avg={avg}");
                    last = s;
                }
            }
        }
    }

    #[test]
    fn tfidf_of_panel() {
        let w: f64 = tfidf_weight(2, 1, 2);
        assert!((w - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(tfidf_weight::<f64>(5, 4, 4), 0.0);
    }
}
