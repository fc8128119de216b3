use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tempir::eval::{ndcg_at_k, render_table, render_tsv, replication_report, Comparison, Gain, ReplicationOptions};
use tempir::formats::{format_run, read_documents_file, read_qrels_file, read_run_file, validate_run, Qrels, Run};
use tempir::index::{build_index, index_dir, TokenizerConfig};
use tempir::pipeline::{run_pipeline, AccessObserver};
use tempir::snapshot::{self, Loaded, Snapshot};
use tempir::synthetic::{generate, SyntheticConfig};

use crate::config::ExperimentConfig;
use crate::error::{output_error, CliError, CliResult};

fn emit(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes()).map_err(output_error("<stdout>"))
}

/// Writes through a temporary file in the target directory, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(output_error(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(output_error(dir))?;
    tmp.write_all(bytes).map_err(output_error(path))?;
    tmp.persist(path).map_err(|e| output_error(path)(e.error))?;
    Ok(())
}

fn resolve(locator: &str, subset: Option<&str>, registry: Option<&Path>) -> CliResult<Vec<Arc<Snapshot>>> {
    let loaded = snapshot::resolve(locator, registry)?;
    match (subset, loaded) {
        (None, loaded) => Ok(loaded.snapshots()),
        (Some(name), Loaded::Meta(meta)) => Ok(meta.subset(name)?.datasets().to_vec()),
        (Some(_), Loaded::Snapshot(s)) => Err(CliError::Usage(format!(
            "--subset needs a collection, but {locator:?} is the single snapshot {}",
            s.id()
        ))),
    }
}

/// One line per snapshot: id, timestamp and prior ids (most recent first, `-`
/// when there are none).
pub fn cmd_snapshots(locator: &str, registry: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    let mut text = String::new();
    for s in snapshot::resolve(locator, registry)?.snapshots() {
        let priors = s.prior_ids();
        let chain = if priors.is_empty() {
            "-".to_string()
        } else {
            priors.join(",")
        };
        text.push_str(&format!("{}\t{}\t{chain}\n", s.id(), s.timestamp()));
    }
    emit(out, &text)
}

/// Builds `index-<id>` under `indices_root` for every selected snapshot and
/// every snapshot in their lineage.
pub fn cmd_index(
    locator: &str,
    subset: Option<&str>,
    registry: Option<&Path>,
    indices_root: &Path,
    tokenizer: TokenizerConfig,
    out: &mut dyn Write,
) -> CliResult<Vec<PathBuf>> {
    let mut targets: BTreeMap<String, Arc<Snapshot>> = BTreeMap::new();
    for s in resolve(locator, subset, registry)? {
        for prior in s.prior_datasets(None)? {
            targets.entry(prior.id().to_string()).or_insert_with(|| prior.clone());
        }
        targets.entry(s.id().to_string()).or_insert(s);
    }
    let mut built = targets
        .into_par_iter()
        .map(|(id, s)| -> CliResult<_> {
            let dir = index_dir(indices_root, &id);
            let docs = read_documents_file(&s.documents_path())?;
            let index = build_index(&id, docs, &dir, tokenizer)?;
            log::info!("indexed {id} into {}", dir.display());
            Ok((s.timestamp(), id, dir, index.stats()))
        })
        .collect::<CliResult<Vec<_>>>()?;
    built.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let mut text = String::new();
    for (_, id, dir, stats) in &built {
        text.push_str(&format!(
            "{id}\t{}\t{} docs\t{} terms\n",
            dir.display(),
            stats.n_docs,
            stats.n_terms
        ));
    }
    emit(out, &text)?;
    Ok(built.into_iter().map(|(_, _, dir, _)| dir).collect())
}

pub fn run_file_name(tag: &str, snapshot_id: &str) -> String {
    format!("{tag}.{snapshot_id}.run")
}

/// Runs the configured pipeline on every snapshot and writes
/// `<out>/<tag>.<snapshot-id>.run` for each; returns the paths written.
pub fn cmd_run(
    config: &ExperimentConfig,
    registry: Option<&Path>,
    observer: Option<Arc<dyn AccessObserver>>,
    out: &mut dyn Write,
) -> CliResult<Vec<PathBuf>> {
    config.validate()?;
    let pipeline = config.build_pipeline()?;
    let tag = config.tag();
    let mut written = Vec::new();
    for s in resolve(&config.dataset, config.subset.as_deref(), registry)? {
        let run = run_pipeline(&s, &pipeline, config.depth, &tag, observer.clone())?;
        let path = config.out.join(run_file_name(&tag, s.id()));
        write_atomic(&path, &format_run(run.records(), &tag)?)?;
        log::info!("{} on {}: {} records", pipeline, s.id(), run.records().len());
        emit(out, &format!("{}\n", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

fn load_run(path: &Path) -> CliResult<Run> {
    let run = read_run_file(path)?;
    validate_run(run.records()).map_err(|e| match e {
        tempir::Error::InvalidRun(m) => tempir::Error::InvalidRun(format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok(run)
}

/// Per-topic and mean nDCG@k, one `measure<TAB>topic<TAB>value` line each.
pub fn cmd_evaluate(run: &Path, qrels: &Path, k: usize, gain: Gain, out: &mut dyn Write) -> CliResult<()> {
    let result = ndcg_at_k::<f64>(&load_run(run)?, &read_qrels_file(qrels)?, k, gain)?;
    let measure = format!("ndcg@{k}");
    let mut text = String::new();
    for (qid, v) in result.per_topic() {
        text.push_str(&format!("{measure}\t{qid}\t{v:.6}\n"));
    }
    text.push_str(&format!("{measure}\tall\t{:.6}\n", result.mean()));
    text.push_str(&format!("no_relevant\tall\t{}\n", result.no_relevant()));
    emit(out, &text)
}

/// File names of one comparison row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareInput {
    pub snapshot: String,
    pub system: String,
    pub orig_adv: PathBuf,
    pub orig_base: PathBuf,
    pub repl_adv: PathBuf,
    pub repl_base: PathBuf,
    pub qrels_orig: PathBuf,
    pub qrels_repl: PathBuf,
}

/// Splits a `<tag>.<snapshot-id>.run` file name.
pub fn parse_run_file_name(path: &Path) -> Option<(String, String)> {
    let stem = path.file_name()?.to_str()?.strip_suffix(".run")?;
    let (tag, id) = stem.rsplit_once('.')?;
    (!tag.is_empty() && !id.is_empty()).then(|| (tag.to_string(), id.to_string()))
}

pub fn read_batch(path: &Path) -> CliResult<Vec<CompareInput>> {
    let bytes = std::fs::read(path).map_err(|e| tempir::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let inputs: Vec<CompareInput> = serde_json::from_slice(&bytes).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    // Relative paths are taken relative to the batch file.
    let base = path.parent().unwrap_or(Path::new(""));
    Ok(inputs
        .into_iter()
        .map(|mut c| {
            for p in [
                &mut c.orig_adv,
                &mut c.orig_base,
                &mut c.repl_adv,
                &mut c.repl_base,
                &mut c.qrels_orig,
                &mut c.qrels_repl,
            ] {
                *p = base.join(&*p);
            }
            c
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Table,
    Tsv,
}

/// Evaluates every comparison and prints the replication report.
pub fn cmd_compare(
    inputs: &[CompareInput],
    options: ReplicationOptions,
    format: ReportFormat,
    out: &mut dyn Write,
) -> CliResult<()> {
    let mut runs: BTreeMap<&Path, Run> = BTreeMap::new();
    let mut qrels: BTreeMap<&Path, Qrels> = BTreeMap::new();
    for c in inputs {
        for p in [&c.orig_adv, &c.orig_base, &c.repl_adv, &c.repl_base] {
            if !runs.contains_key(p.as_path()) {
                runs.insert(p, load_run(p)?);
            }
        }
        for p in [&c.qrels_orig, &c.qrels_repl] {
            if !qrels.contains_key(p.as_path()) {
                qrels.insert(p, read_qrels_file(p)?);
            }
        }
    }
    let comparisons: Vec<Comparison<'_>> = inputs
        .iter()
        .map(|c| Comparison {
            snapshot: &c.snapshot,
            system: &c.system,
            orig_adv: &runs[c.orig_adv.as_path()],
            orig_base: &runs[c.orig_base.as_path()],
            repl_adv: &runs[c.repl_adv.as_path()],
            repl_base: &runs[c.repl_base.as_path()],
            qrels_orig: &qrels[c.qrels_orig.as_path()],
            qrels_repl: &qrels[c.qrels_repl.as_path()],
        })
        .collect();
    let rows = replication_report::<f64>(&comparisons, options)?;
    let text = match format {
        ReportFormat::Table => render_table(&rows, options.cutoff),
        ReportFormat::Tsv => render_tsv(&rows, options.cutoff),
    };
    emit(out, &text)
}

/// Writes a synthetic collection under `root` and prints its directory.
pub fn cmd_generate(config: &SyntheticConfig, root: &Path, out: &mut dyn Write) -> CliResult<PathBuf> {
    let dir = generate(config)?.write(root)?;
    emit(out, &format!("{}\n", dir.display()))?;
    Ok(dir)
}
