//! Effectiveness and replicability measures.

mod ndcg;
mod replication;
pub mod special;
mod ttest;

pub use ndcg::{ndcg_at_k, ndcg_of_topic, EvalResult, Gain};
pub use replication::{
    delta_ri, effect_ratio, render_table, render_tsv, replication_report, report_columns, Comparison,
    ReplicationOptions, ReplicationRow, UNDEFINED,
};
pub use ttest::{unpaired_ttest, TTest, Variance};
