//! Replication measures comparing an original and a re-implemented system,
//! each relative to its own run of a shared reference system.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::ndcg::{ndcg_at_k, EvalResult, Gain};
use super::ttest::{unpaired_ttest, Variance};
use crate::error::Result;
use crate::formats::{Qrels, Run};
use crate::scalar::{mean, Scalar};

/// Mean per-topic difference `adv - base` over the union of both topic sets;
/// a topic missing on one side counts as 0 there.
fn mean_delta<S: Scalar>(adv: &EvalResult<S>, base: &EvalResult<S>) -> S {
    let topics: BTreeSet<&String> = adv.per_topic().keys().chain(base.per_topic().keys()).collect();
    mean(
        topics
            .into_iter()
            .map(|q| adv.get(q).unwrap_or_else(S::zero) - base.get(q).unwrap_or_else(S::zero)),
    )
}

/// Effect Ratio: mean improvement of the re-implementation over its reference
/// divided by that of the original. `None` when the original shows no effect.
pub fn effect_ratio<S: Scalar>(
    orig_adv: &EvalResult<S>,
    orig_base: &EvalResult<S>,
    repl_adv: &EvalResult<S>,
    repl_base: &EvalResult<S>,
) -> Option<S> {
    let denominator = mean_delta(orig_adv, orig_base);
    if denominator == S::zero() || !denominator.is_finite() {
        return None;
    }
    Some(mean_delta(repl_adv, repl_base) / denominator)
}

fn relative_improvement<S: Scalar>(adv: &EvalResult<S>, base: &EvalResult<S>) -> Option<S> {
    let b = base.mean();
    (b > S::zero()).then(|| (adv.mean() - b) / b)
}

/// Delta Relative Improvement: `RI_original - RI_reimplementation`. `None`
/// when either reference mean is zero.
pub fn delta_ri<S: Scalar>(
    orig_adv: &EvalResult<S>,
    orig_base: &EvalResult<S>,
    repl_adv: &EvalResult<S>,
    repl_base: &EvalResult<S>,
) -> Option<S> {
    Some(relative_improvement(orig_adv, orig_base)? - relative_improvement(repl_adv, repl_base)?)
}

/// Runs and judgments for one (snapshot, system) comparison.
#[derive(Debug, Clone, Copy)]
pub struct Comparison<'a> {
    pub snapshot: &'a str,
    pub system: &'a str,
    pub orig_adv: &'a Run,
    pub orig_base: &'a Run,
    pub repl_adv: &'a Run,
    pub repl_base: &'a Run,
    /// Judgments for the original runs.
    pub qrels_orig: &'a Qrels,
    /// Judgments for the re-implementation runs.
    pub qrels_repl: &'a Qrels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicationOptions {
    pub cutoff: usize,
    pub gain: Gain,
    pub variance: Variance,
}

impl Default for ReplicationOptions {
    fn default() -> Self {
        Self {
            cutoff: 10,
            gain: Gain::Linear,
            variance: Variance::Pooled,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRow<S> {
    pub snapshot: String,
    pub system: String,
    /// `None` when undefined.
    pub er: Option<S>,
    /// `None` when undefined.
    pub delta_ri: Option<S>,
    /// t-test between per-topic scores of the original and re-implemented system.
    pub p_value: S,
    pub mean_original: S,
    pub mean_reimplementation: S,
}

/// One row per comparison, ordered by snapshot then system.
pub fn replication_report<S: Scalar>(
    comparisons: &[Comparison<'_>],
    options: ReplicationOptions,
) -> Result<Vec<ReplicationRow<S>>> {
    let mut rows = comparisons
        .iter()
        .map(|c| {
            let eval = |run: &Run, qrels: &Qrels| ndcg_at_k::<S>(run, qrels, options.cutoff, options.gain);
            let orig_adv = eval(c.orig_adv, c.qrels_orig)?;
            let orig_base = eval(c.orig_base, c.qrels_orig)?;
            let repl_adv = eval(c.repl_adv, c.qrels_repl)?;
            let repl_base = eval(c.repl_base, c.qrels_repl)?;
            let test = unpaired_ttest(&orig_adv.values(), &repl_adv.values(), options.variance)?;
            Ok(ReplicationRow {
                snapshot: c.snapshot.to_string(),
                system: c.system.to_string(),
                er: effect_ratio(&orig_adv, &orig_base, &repl_adv, &repl_base),
                delta_ri: delta_ri(&orig_adv, &orig_base, &repl_adv, &repl_base),
                p_value: test.p_value,
                mean_original: orig_adv.mean(),
                mean_reimplementation: repl_adv.mean(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.snapshot.cmp(&b.snapshot).then_with(|| a.system.cmp(&b.system)));
    Ok(rows)
}

pub const UNDEFINED: &str = "undefined";

/// Column headers, in order.
pub fn report_columns(cutoff: usize) -> [String; 6] {
    [
        "snapshot".into(),
        "system".into(),
        "ER".into(),
        "ΔRI".into(),
        "p-value".into(),
        format!("nDCG@{cutoff}"),
    ]
}

fn cells<S: Scalar>(row: &ReplicationRow<S>, digits: usize) -> [String; 6] {
    let measure = |m: Option<S>| m.map_or_else(|| UNDEFINED.to_string(), |v| format!("{:.*}", digits, v.widen()));
    [
        row.snapshot.clone(),
        row.system.clone(),
        measure(row.er),
        measure(row.delta_ri),
        format!("{:.*e}", digits.saturating_sub(1), row.p_value.widen()),
        format!(
            "{:.*}/{:.*}",
            digits,
            row.mean_original.widen(),
            digits,
            row.mean_reimplementation.widen()
        ),
    ]
}

/// Tab-separated report with a header line. The nDCG column holds
/// `original/re-implementation`.
pub fn render_tsv<S: Scalar>(rows: &[ReplicationRow<S>], cutoff: usize) -> String {
    let mut out = report_columns(cutoff).join("\t");
    out.push('\n');
    for row in rows {
        out.push_str(&cells(row, 6).join("\t"));
        out.push('\n');
    }
    out
}

/// Aligned plain-text table with three-digit precision.
pub fn render_table<S: Scalar>(rows: &[ReplicationRow<S>], cutoff: usize) -> String {
    let header = report_columns(cutoff);
    let body: Vec<[String; 6]> = rows.iter().map(|r| cells(r, 3)).collect();
    let mut widths = [0usize; 6];
    for line in std::iter::once(&header).chain(&body) {
        for (w, cell) in widths.iter_mut().zip(line) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut emit = |line: &[String; 6]| {
        let padded: Vec<String> = line
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (cell, w))| {
                let pad = w - cell.chars().count();
                if i < 2 {
                    format!("{cell}{}", " ".repeat(pad))
                } else {
                    format!("{}{cell}", " ".repeat(pad))
                }
            })
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    emit(&header);
    for line in &body {
        emit(line);
    }
    out
}
