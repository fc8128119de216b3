use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempir::pipeline::{Bm25Retriever, Pipeline, QrelBoost, QrelBoostConfig, RelevanceFeedback, RfConfig, Stage};

use crate::error::{CliError, CliResult};

/// One experiment: which collection, which pipeline, where runs go.
///
/// Read from a single JSON document; every key may be overridden on the
/// command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: String,
    pub subset: Option<String>,
    /// Stage names joined by `>>`, e.g. `"bm25 >> qrel_boost"`.
    pub pipeline: String,
    pub lambda: f64,
    pub mu: f64,
    /// Number of prior snapshots consulted; `null` for all of them.
    pub memory: Option<usize>,
    pub k_expansion: usize,
    pub min_rel: u8,
    pub depth: usize,
    pub out: PathBuf,
    /// Defaults to the stage names joined by `+`.
    pub tag: Option<String>,
    pub indices_root: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: String::new(),
            subset: None,
            pipeline: "bm25".to_string(),
            lambda: 0.7,
            mu: 1.5,
            memory: Some(1),
            k_expansion: 10,
            min_rel: 1,
            depth: 1000,
            out: PathBuf::from("runs"),
            tag: None,
            indices_root: PathBuf::from("indices"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| tempir::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        serde_json::from_slice(&bytes).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Stage names in order.
    pub fn stage_names(&self) -> Vec<&str> {
        self.pipeline.split(">>").map(str::trim).collect()
    }

    pub fn tag(&self) -> String {
        self.tag.clone().unwrap_or_else(|| self.stage_names().join("+"))
    }

    /// Instantiates the pipeline named by `self.pipeline`.
    pub fn build_pipeline(&self) -> CliResult<Pipeline> {
        let mut stages = Vec::new();
        for name in self.stage_names() {
            let stage: Stage = match name {
                "bm25" => Bm25Retriever::new(&self.indices_root).into(),
                "qrel_boost" => QrelBoost::new(QrelBoostConfig::new(self.lambda, self.mu, self.memory)?).into(),
                "rf" => RelevanceFeedback::new(RfConfig::new(
                    self.k_expansion,
                    self.memory,
                    self.min_rel,
                    &self.indices_root,
                )?)
                .into(),
                other => {
                    return Err(tempir::Error::InvalidPipeline(format!(
                        "unknown stage `{other}` (expected bm25, qrel_boost or rf)"
                    ))
                    .into())
                }
            };
            stages.push(stage);
        }
        let pipeline = Pipeline::new(stages);
        pipeline.validate()?;
        Ok(pipeline)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.dataset.is_empty() {
            return Err(CliError::Usage(
                "no dataset given (set `dataset` or pass --dataset)".into(),
            ));
        }
        let tag = self.tag();
        if tag.is_empty() || tag.chars().any(char::is_whitespace) {
            return Err(CliError::Usage(format!(
                "run tag {tag:?} must be non-empty without whitespace"
            )));
        }
        if self.depth == 0 {
            return Err(CliError::Usage("depth must be at least 1".into()));
        }
        self.build_pipeline().map(drop)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_partial_json() {
        let c: ExperimentConfig =
            serde_json::from_str(r#"{"dataset": "lw/*", "pipeline": "bm25 >> qrel_boost", "lambda": 0.9}"#).unwrap();
        assert_eq!(c.lambda, 0.9);
        assert_eq!(c.memory, Some(1));
        assert_eq!(c.tag(), "bm25+qrel_boost");
        assert_eq!(c.build_pipeline().unwrap().to_string(), "bm25 >> qrel_boost");
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"lamda": 0.9}"#).is_err());
    }

    #[test]
    fn rejects_bad_pipelines() {
        let with = |p: &str| ExperimentConfig {
            dataset: "x".into(),
            pipeline: p.into(),
            ..Default::default()
        };
        assert!(with("rf >> bm25 >> qrel_boost").validate().is_ok());
        assert!(with("bm25 >> rf").validate().is_err());
        assert!(with("bm42").validate().is_err());
        assert!(with("").validate().is_err());
        let bad_lambda = ExperimentConfig {
            lambda: 1.5,
            ..with("bm25 >> qrel_boost")
        };
        assert!(bad_lambda.validate().is_err());
        assert!(ExperimentConfig::default().validate().is_err());
    }
}
