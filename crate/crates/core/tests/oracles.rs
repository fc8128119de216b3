use std::collections::BTreeMap;

use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use tempir::eval::*;
use tempir::formats::{Grade, QrelRecord, Qrels, Run, RunRecord};

fn dcg(gains: &[f64], k: usize) -> f64 {
    let mut total = 0.0;
    for (i, g) in gains.iter().take(k).enumerate() {
        total += g / ((i + 2) as f64).log2();
    }
    total
}

fn oracle_ndcg(ranked: &[u8], k: usize) -> f64 {
    let gains: Vec<f64> = ranked.iter().map(|&g| g as f64).collect();
    let mut ideal = gains.clone();
    ideal.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let idcg = dcg(&ideal, k);
    if idcg == 0.0 {
        0.0
    } else {
        dcg(&gains, k) / idcg
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Non-increasing grade vectors of length n: every multiset of grades once.
fn grade_multisets(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for twos in 0..=n {
        for ones in 0..=n - twos {
            let mut v = vec![2u8; twos];
            v.extend(std::iter::repeat_n(1u8, ones));
            v.extend(std::iter::repeat_n(0u8, n - twos - ones));
            out.push(v);
        }
    }
    out
}

#[test]
fn ndcg_matches_brute_force() {
    for n in 1..=6 {
        let docs: Vec<usize> = (0..n).collect();
        let orders = permutations(&docs);
        for grades in grade_multisets(n) {
            let qrels = Qrels::from_records((0..n).map(|d| QrelRecord {
                qid: "q".into(),
                doc_id: format!("d{d}"),
                rel: Grade::new(grades[d]).unwrap(),
            }))
            .unwrap();
            for order in &orders {
                let run = Run::new(
                    order
                        .iter()
                        .enumerate()
                        .map(|(i, &d)| RunRecord {
                            qid: "q".into(),
                            doc_id: format!("d{d}"),
                            rank: i as u32 + 1,
                            score: (n - i) as f64,
                            tag: "t".into(),
                        })
                        .collect(),
                );
                let ranked: Vec<u8> = order.iter().map(|&d| grades[d]).collect();
                for k in [3, 10] {
                    let got = ndcg_at_k::<f64>(&run, &qrels, k, Gain::Linear).unwrap().mean();
                    let want = oracle_ndcg(&ranked, k);
                    assert!((got - want).abs() <= 1e-12, "{ranked:?} k={k}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn ndcg_worked_example() {
    let g = |v| Grade::new(v).unwrap();
    let value: f64 = ndcg_of_topic(&[g(0), g(2), g(1)], &[g(2), g(1)], 10, Gain::Linear);
    assert!((value - 0.6697).abs() < 1e-4);
}

fn oracle_ttest(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ma = a.iter().sum::<f64>() / na;
    let mb = b.iter().sum::<f64>() / nb;
    let ssa: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let ssb: f64 = b.iter().map(|x| (x - mb).powi(2)).sum();
    let df = na + nb - 2.0;
    let se = ((ssa + ssb) / df * (1.0 / na + 1.0 / nb)).sqrt();
    let t = (ma - mb) / se;
    let dist = StudentsT::new(0.0, 1.0, df).unwrap();
    (t, 2.0 * (1.0 - dist.cdf(t.abs())))
}

fn oracle_welch(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ma = a.iter().sum::<f64>() / na;
    let mb = b.iter().sum::<f64>() / nb;
    let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / (na - 1.0) / na;
    let vb = b.iter().map(|x| (x - mb).powi(2)).sum::<f64>() / (nb - 1.0) / nb;
    let t = (ma - mb) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).unwrap();
    (t, 2.0 * (1.0 - dist.cdf(t.abs())))
}

#[test]
fn ttest_worked_example_against_oracle() {
    let (a, b) = ([0.2, 0.4, 0.6], [0.5, 0.7, 0.9]);
    let got = unpaired_ttest(&a, &b, Variance::Pooled).unwrap();
    let (t, p) = oracle_ttest(&a, &b);
    assert!((got.t - t).abs() < 1e-6 && (got.p_value - p).abs() < 1e-6);
    assert_eq!(
        unpaired_ttest(&[0.0; 3], &[1.0; 3], Variance::Pooled).unwrap().p_value,
        0.0
    );
    assert_eq!(unpaired_ttest(&a, &a, Variance::Pooled).unwrap().p_value, 1.0);
}

fn result(values: &[f64]) -> EvalResult<f64> {
    EvalResult::from_scores(
        values
            .iter()
            .enumerate()
            .map(|(i, v)| (format!("q{i:02}"), *v))
            .collect::<BTreeMap<_, _>>(),
        0,
    )
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 2..30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ttest_matches_oracle(a in sample(), b in sample()) {
        let got = unpaired_ttest(&a, &b, Variance::Pooled).unwrap();
        let (t, p) = oracle_ttest(&a, &b);
        prop_assert!((got.t - t).abs() <= 1e-9 * t.abs().max(1.0));
        prop_assert!((got.p_value - p).abs() < 1e-6, "{} vs {}", got.p_value, p);
        let got = unpaired_ttest(&a, &b, Variance::Welch).unwrap();
        let (t, p) = oracle_welch(&a, &b);
        prop_assert!((got.t - t).abs() <= 1e-9 * t.abs().max(1.0));
        prop_assert!((got.p_value - p).abs() < 1e-6);
    }

    #[test]
    fn ttest_symmetric(a in sample(), b in sample()) {
        let ab = unpaired_ttest(&a, &b, Variance::Pooled).unwrap();
        let ba = unpaired_ttest(&b, &a, Variance::Pooled).unwrap();
        prop_assert_eq!(ab.t, -ba.t);
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
    }

    #[test]
    fn self_replication_is_perfect(x in sample(), shift in 0.01f64..0.5) {
        let y: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let (x, y) = (result(&x), result(&y));
        prop_assert!((effect_ratio(&x, &y, &x, &y).unwrap() - 1.0).abs() < 1e-12);
        prop_assert_eq!(delta_ri(&x, &y, &x, &y), Some(0.0));
        prop_assert_eq!(unpaired_ttest(&x.values(), &x.values(), Variance::Pooled).unwrap().p_value, 1.0);
    }

    #[test]
    fn effect_ratio_invariant_to_common_scaling(
        base in prop::collection::vec(0.0f64..0.5, 5),
        d_orig in prop::collection::vec(0.01f64..0.5, 5),
        d_repl in prop::collection::vec(-0.5f64..0.5, 5),
        c in 0.1f64..3.0,
    ) {
        let add = |d: &[f64], s: f64| -> Vec<f64> { base.iter().zip(d).map(|(b, d)| b + s * d).collect() };
        let er = |s| effect_ratio(&result(&add(&d_orig, s)), &result(&base), &result(&add(&d_repl, s)), &result(&base)).unwrap();
        prop_assert!((er(1.0) - er(c)).abs() < 1e-9);
    }

    #[test]
    fn moving_relevant_doc_up_never_hurts(grades in prop::collection::vec(0u8..3, 2..10), from in 1usize..10) {
        let from = from % grades.len();
        prop_assume!(from > 0 && grades[from] > 0);
        let g: Vec<Grade> = grades.iter().map(|&v| Grade::new(v).unwrap()).collect();
        let mut better = g.clone();
        better.swap(from - 1, from);
        prop_assume!(g[from - 1].value() == 0);
        let before: f64 = ndcg_of_topic(&g, &g, 10, Gain::Linear);
        let after: f64 = ndcg_of_topic(&better, &g, 10, Gain::Linear);
        prop_assert!(after >= before);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&after));
    }
}

#[test]
fn report_rows_for_identical_runs() {
    let qrels = Qrels::from_records((0..4).flat_map(|q| {
        (0..3).map(move |d| QrelRecord {
            qid: format!("q{q}"),
            doc_id: format!("d{d}"),
            rel: Grade::new(((q + d) % 3) as u8).unwrap(),
        })
    }))
    .unwrap();
    let run = |order: [usize; 3]| {
        Run::new(
            (0..4)
                .flat_map(|q| {
                    order.iter().enumerate().map(move |(i, d)| RunRecord {
                        qid: format!("q{q}"),
                        doc_id: format!("d{d}"),
                        rank: i as u32 + 1,
                        score: 3.0 - i as f64,
                        tag: "t".into(),
                    })
                })
                .collect(),
        )
    };
    let (adv, base) = (run([2, 1, 0]), run([0, 1, 2]));
    let mut comparisons = Vec::new();
    for snapshot in ["s2", "s1"] {
        for system in ["rf", "qrel_boost"] {
            comparisons.push(Comparison {
                snapshot,
                system,
                orig_adv: &adv,
                orig_base: &base,
                repl_adv: &adv,
                repl_base: &base,
                qrels_orig: &qrels,
                qrels_repl: &qrels,
            });
        }
    }
    let rows = replication_report::<f64>(&comparisons, ReplicationOptions::default()).unwrap();
    let keys: Vec<(&str, &str)> = rows.iter().map(|r| (r.snapshot.as_str(), r.system.as_str())).collect();
    assert_eq!(
        keys,
        [("s1", "qrel_boost"), ("s1", "rf"), ("s2", "qrel_boost"), ("s2", "rf")]
    );
    for r in &rows {
        assert!((r.er.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.delta_ri, Some(0.0));
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.mean_original, r.mean_reimplementation);
    }
}
