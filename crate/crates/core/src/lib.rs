//! Longitudinal retrieval experiments over dynamic test collections.

pub mod error;
pub mod eval;
pub mod formats;
pub mod index;
pub mod pipeline;
pub mod scalar;
pub mod snapshot;
pub mod synthetic;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Bm25 = index::Bm25Params<f64>;
pub type QrelBoostParams = pipeline::QrelBoostConfig<f64>;
pub type Evaluation = eval::EvalResult<f64>;
pub type Replication = eval::ReplicationRow<f64>;
