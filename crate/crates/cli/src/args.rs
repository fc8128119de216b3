use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tempir::eval::{Gain, ReplicationOptions, Variance};
use tempir::index::TokenizerConfig;
use tempir::snapshot::REGISTRY_ENV;
use tempir::synthetic::SyntheticConfig;

use crate::commands::{self, parse_run_file_name, CompareInput, ReportFormat};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "tempir",
    version,
    about = "Longitudinal retrieval experiments over dynamic test collections"
)]
pub struct Cli {
    /// Directory holding named collections, used to resolve `name/...` locators.
    #[arg(long, global = true, env = REGISTRY_ENV)]
    pub datasets: Option<PathBuf>,

    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List snapshots with timestamps and prior chains.
    Snapshots { locator: String },
    /// Build one index per snapshot.
    Index(IndexArgs),
    /// Run a pipeline on every snapshot.
    Run(Box<RunArgs>),
    /// Per-topic and mean nDCG of a run.
    Evaluate(EvaluateArgs),
    /// Replicability of re-implemented runs against original ones.
    Compare(CompareArgs),
    /// Write a seeded synthetic collection.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    pub locator: String,
    #[arg(long)]
    pub subset: Option<String>,
    #[arg(long, visible_alias = "out", default_value = "indices")]
    pub indices_root: PathBuf,
    #[arg(long)]
    pub stem: bool,
    #[arg(long)]
    pub stopwords: bool,
}

fn parse_memory(s: &str) -> Result<Option<usize>, String> {
    if s == "all" {
        return Ok(None);
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive integer or `all`, got {s:?}")),
        Ok(n) => Ok(Some(n)),
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON experiment config; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub subset: Option<String>,
    /// e.g. "bm25 >> qrel_boost" or "rf >> bm25".
    #[arg(long)]
    pub pipeline: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Prior snapshots to consult: a positive integer or `all`.
    #[arg(long, value_parser = parse_memory)]
    pub memory: Option<Option<usize>>,
    #[arg(long)]
    pub k_expansion: Option<usize>,
    #[arg(long)]
    pub min_rel: Option<u8>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tag: Option<String>,
    #[arg(long)]
    pub indices_root: Option<PathBuf>,
}

impl RunArgs {
    pub fn resolve(&self) -> CliResult<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            )*};
        }
        set!(
            dataset,
            pipeline,
            lambda,
            mu,
            memory,
            k_expansion,
            min_rel,
            depth,
            out,
            indices_root
        );
        if self.subset.is_some() {
            c.subset = self.subset.clone();
        }
        if self.tag.is_some() {
            c.tag = self.tag.clone();
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GainArg {
    Linear,
    Exp,
}

impl From<GainArg> for Gain {
    fn from(g: GainArg) -> Gain {
        match g {
            GainArg::Linear => Gain::Linear,
            GainArg::Exp => Gain::Exponential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TtestArg {
    Pooled,
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Table,
    Tsv,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub run: PathBuf,
    pub qrels: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = GainArg::Linear)]
    pub gain: GainArg,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// JSON list of comparisons (`snapshot`, `system`, `orig_adv`,
    /// `orig_base`, `repl_adv`, `repl_base`, `qrels_orig`, `qrels_repl`).
    #[arg(long, conflicts_with_all = ["orig_adv", "orig_base", "repl_adv", "repl_base", "qrels_orig", "qrels_repl"])]
    pub batch: Option<PathBuf>,
    #[arg(long, required_unless_present = "batch")]
    pub orig_adv: Option<PathBuf>,
    #[arg(long, required_unless_present = "batch")]
    pub orig_base: Option<PathBuf>,
    #[arg(long, required_unless_present = "batch")]
    pub repl_adv: Option<PathBuf>,
    #[arg(long, required_unless_present = "batch")]
    pub repl_base: Option<PathBuf>,
    #[arg(long, required_unless_present = "batch")]
    pub qrels_orig: Option<PathBuf>,
    #[arg(long, required_unless_present = "batch")]
    pub qrels_repl: Option<PathBuf>,
    /// Defaults to the snapshot id in a `<tag>.<snapshot>.run` file name.
    #[arg(long)]
    pub snapshot: Option<String>,
    /// Defaults to the tag in a `<tag>.<snapshot>.run` file name.
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = GainArg::Linear)]
    pub gain: GainArg,
    #[arg(long, value_enum, default_value_t = TtestArg::Pooled)]
    pub ttest: TtestArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    pub format: FormatArg,
}

impl CompareArgs {
    pub fn inputs(&self) -> CliResult<Vec<CompareInput>> {
        if let Some(batch) = &self.batch {
            return commands::read_batch(batch);
        }
        let need = |p: &Option<PathBuf>| p.clone().expect("required by clap");
        let repl_adv = need(&self.repl_adv);
        let parsed = parse_run_file_name(&repl_adv);
        let snapshot = self
            .snapshot
            .clone()
            .or_else(|| parsed.as_ref().map(|p| p.1.clone()))
            .unwrap_or_else(|| "-".to_string());
        let system = self
            .system
            .clone()
            .or_else(|| parsed.as_ref().map(|p| p.0.clone()))
            .unwrap_or_else(|| "system".to_string());
        Ok(vec![CompareInput {
            snapshot,
            system,
            orig_adv: need(&self.orig_adv),
            orig_base: need(&self.orig_base),
            repl_adv,
            repl_base: need(&self.repl_base),
            qrels_orig: need(&self.qrels_orig),
            qrels_repl: need(&self.qrels_repl),
        }])
    }

    pub fn options(&self) -> CliResult<ReplicationOptions> {
        if self.k == 0 {
            return Err(CliError::Usage("--k must be at least 1".into()));
        }
        Ok(ReplicationOptions {
            cutoff: self.k,
            gain: self.gain.into(),
            variance: match self.ttest {
                TtestArg::Pooled => Variance::Pooled,
                TtestArg::Welch => Variance::Welch,
            },
        })
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Parent directory; the collection goes to `<root>/<name>`.
    pub root: PathBuf,
    #[arg(long, default_value = "synthetic")]
    pub name: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub snapshots: usize,
    #[arg(long, default_value_t = 10)]
    pub queries: usize,
    #[arg(long, default_value_t = 200)]
    pub docs: usize,
    #[arg(long, default_value_t = 5)]
    pub relevant: usize,
    #[arg(long, default_value_t = 5)]
    pub distractors: usize,
}

/// Executes a parsed command line, writing results to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    if let Some(n) = cli.threads {
        // Fails only if the pool is already set up, e.g. on a second call.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let registry = cli.datasets.as_deref();
    match &cli.command {
        Command::Snapshots { locator } => commands::cmd_snapshots(locator, registry, out),
        Command::Index(a) => {
            let tokenizer = TokenizerConfig {
                stopwords: a.stopwords,
                stem: a.stem,
            };
            commands::cmd_index(
                &a.locator,
                a.subset.as_deref(),
                registry,
                &a.indices_root,
                tokenizer,
                out,
            )
            .map(drop)
        }
        Command::Run(a) => commands::cmd_run(&a.resolve()?, registry, None, out).map(drop),
        Command::Evaluate(a) => {
            if a.k == 0 {
                return Err(CliError::Usage("--k must be at least 1".into()));
            }
            commands::cmd_evaluate(&a.run, &a.qrels, a.k, a.gain.into(), out)
        }
        Command::Compare(a) => {
            let format = match a.format {
                FormatArg::Table => ReportFormat::Table,
                FormatArg::Tsv => ReportFormat::Tsv,
            };
            commands::cmd_compare(&a.inputs()?, a.options()?, format, out)
        }
        Command::Generate(a) => {
            let config = SyntheticConfig {
                name: a.name.clone(),
                seed: a.seed,
                snapshots: a.snapshots,
                queries: a.queries,
                docs_per_snapshot: a.docs,
                relevant_per_query: a.relevant,
                distractors_per_query: a.distractors,
                ..SyntheticConfig::default()
            };
            commands::cmd_generate(&config, &a.root, out).map(drop)
        }
    }
}
