//! Command-line front end: `ingest`, `synth`, `pretrain`, `train`, `eval`
//! and `project`.
//!
//! Every setting can come from a flag or from a flat `key=value` file passed
//! with `--config` (keys are the flag names, `-` or `_`); flags win. The
//! effective settings are written to `config.txt` in the output directory,
//! which defaults to `runs/run-<unix time>-s<seed>`.
//!
//! Exit codes: 0 on success, 1 on internal errors, 2 on usage or config
//! errors (including missing input files).

mod config;

use std::fmt::Write as _;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

pub use config::Resolver;

use crate::data::{
    ingest_csv, preprocess, split_folds, synth_generate, ColumnFilter, CsvSchema, Dataset, FoldSplit,
    MasteryModel, PreprocessOptions, SynthConfig,
};
use crate::embed::{build_wxv, train_skipgram, Corpus, EmbeddingTable, SkipGramConfig};
use crate::error::Error;
use crate::eval::{
    auc, cross_validate, evaluate_fold, pca_project, separation_score, CvConfig, Variant,
};
use crate::graph::{build_skill_graph, laplacian, QuestionGraph};
use crate::net::{train, AdamConfig, Checkpoint, TrainConfig};
use crate::seed;

pub const CONFIG_FILE: &str = "config.txt";
pub const GRAPH_FILE: &str = "graph.edges";
pub const EMBEDDINGS_FILE: &str = "embeddings.txt";
pub const PRETRAIN_LOG: &str = "pretrain.log";
pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
pub const LOSS_LOG: &str = "loss.log";
pub const REPORT_FILE: &str = "report.json";
pub const PROJECTION_FILE: &str = "projection.csv";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Internal(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::NonFiniteGradient(_) | Error::Json(_) => CliError::Internal(msg),
            Error::Io { ref source, .. } if source.kind() != ErrorKind::NotFound => CliError::Internal(msg),
            _ => CliError::Usage(msg),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "qdkt", version, about = "Question-level deep knowledge tracing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read an interaction CSV, clean it and write a dataset dump plus the skill graph.
    Ingest(IngestArgs),
    /// Generate a synthetic dataset dump plus its skill graph.
    Synth(SynthArgs),
    /// Train subword skip-gram embeddings on a dataset dump.
    Pretrain(PretrainArgs),
    /// Train one model variant; writes a checkpoint and a per-epoch loss log.
    Train(TrainArgs),
    /// Cross-validate one model variant; writes a JSON report.
    Eval(EvalArgs),
    /// PCA of the input embedding columns; writes a CSV and prints the separation score.
    Project(ProjectArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// key=value config file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: runs/run-<unix time>-s<seed>]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it [default: available cores]
    #[arg(long)]
    pub threads: Option<usize>,
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: Common,
    /// Interaction CSV with a header row
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Learner column [default: user_id]
    #[arg(long)]
    pub learner_col: Option<String>,
    /// Question column [default: problem_id]
    #[arg(long)]
    pub question_col: Option<String>,
    /// Skill column, empty for none [default: skill_id]
    #[arg(long)]
    pub skill_col: Option<String>,
    /// Ordering column, empty to keep file order [default: order_id]
    #[arg(long)]
    pub order_col: Option<String>,
    /// 0/1 correctness column [default: correct]
    #[arg(long)]
    pub assessment_col: Option<String>,
    /// Separator between several skills in one cell [default: ;]
    #[arg(long)]
    pub skill_delimiter: Option<char>,
    /// Drop rows whose value in this column is listed in --exclude-values
    #[arg(long)]
    pub exclude_col: Option<String>,
    /// Comma-separated values for --exclude-col
    #[arg(long)]
    pub exclude_values: Option<String>,
    /// Remove exact duplicate records (same learner, question, order and answer) [default: off]
    #[arg(long)]
    pub dedup: bool,
    /// Drop interactions on questions without a skill label [default: off]
    #[arg(long)]
    pub drop_unskilled: bool,
    /// Drop learners with fewer interactions than this [default: 0]
    #[arg(long)]
    pub min_seq_len: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of learners [default: 100]
    #[arg(long)]
    pub learners: Option<usize>,
    /// Number of questions [default: 200]
    #[arg(long)]
    pub questions: Option<usize>,
    /// Number of skills [default: 10]
    #[arg(long)]
    pub skills: Option<usize>,
    /// Interactions per learner [default: 30]
    #[arg(long)]
    pub obs_per_learner: Option<usize>,
    /// Consecutive questions practised on one skill [default: 4]
    #[arg(long)]
    pub block_len: Option<usize>,
    /// Chance that a question gets a second skill [default: 0]
    #[arg(long)]
    pub multi_skill_prob: Option<f64>,
    /// Cap on total answers per question [default: none]
    #[arg(long)]
    pub max_obs_per_question: Option<usize>,
    /// Standard deviation of question difficulty [default: 1]
    #[arg(long)]
    pub difficulty_spread: Option<f64>,
    /// Mastery gained per practice opportunity [default: 0.15]
    #[arg(long)]
    pub learning_gain: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FoldArgs {
    /// Train on the training learners of this fold only [default: all learners]
    #[arg(long)]
    pub fold: Option<usize>,
    /// Number of folds [default: 5]
    #[arg(long)]
    pub k: Option<usize>,
    /// Share of learners in each fold's training half [default: 0.7]
    #[arg(long)]
    pub train_frac: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SkipGramArgs {
    /// Skip-gram context window [default: 5]
    #[arg(long)]
    pub window: Option<usize>,
    /// Negative samples per positive pair [default: 5]
    #[arg(long)]
    pub negatives: Option<usize>,
    /// Skip-gram passes over the corpus [default: 5]
    #[arg(long)]
    pub sg_epochs: Option<usize>,
    /// Initial skip-gram learning rate, decayed linearly [default: 0.05]
    #[arg(long)]
    pub sg_lr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PretrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dataset dump directory
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Embedding dimension [default: 128]
    #[arg(long)]
    pub dim: Option<usize>,
    #[command(flatten)]
    pub skipgram: SkipGramArgs,
    #[command(flatten)]
    pub folds: FoldArgs,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model variant: dkt-skill, qdkt-base, qdkt-reg, qdkt-fasttext, qdkt-full [default: qdkt-base]
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Input embedding size K [default: 128]
    #[arg(long)]
    pub embed_dim: Option<usize>,
    /// LSTM state size H [default: 128]
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Laplacian penalty weight, used by regularized variants [default: 0.1]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Dropout on the hidden state [default: 0.2]
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Adam learning rate [default: 0.001]
    #[arg(long)]
    pub lr: Option<f64>,
    /// Adam beta1 [default: 0.9]
    #[arg(long)]
    pub beta1: Option<f64>,
    /// Adam beta2 [default: 0.999]
    #[arg(long)]
    pub beta2: Option<f64>,
    /// Adam epsilon [default: 1e-8]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Global gradient-norm clip [default: 5]
    #[arg(long)]
    pub grad_clip: Option<f64>,
    /// Training epochs [default: 25]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Sequence windows per optimizer step [default: 32]
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Longest training window; longer sequences are split [default: 200]
    #[arg(long)]
    pub max_len: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dataset dump directory
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Question graph edge list (required by qdkt-reg and qdkt-full)
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Pretrained embedding table (required by qdkt-fasttext and qdkt-full)
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub folds: FoldArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Dataset dump directory
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Question graph edge list [default: built from the skill labels]
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of folds [default: 5]
    #[arg(long)]
    pub k: Option<usize>,
    /// Share of learners in each fold's training half [default: 0.7]
    #[arg(long)]
    pub train_frac: Option<f64>,
    /// Comma-separated penalty weights to choose from per fold, e.g. 0,0.01,0.05,0.1,0.5 [default: none, use --lambda]
    #[arg(long)]
    pub lambda_grid: Option<String>,
    /// Share of training learners held out to choose the penalty weight [default: 0.2]
    #[arg(long)]
    pub validation_frac: Option<f64>,
    #[command(flatten)]
    pub skipgram: SkipGramArgs,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub common: Common,
    /// Checkpoint whose input embeddings are projected
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Embedding table to project instead of a checkpoint
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Question count when projecting an embedding table
    #[arg(long)]
    pub questions: Option<usize>,
    /// Principal components kept [default: 2]
    #[arg(long)]
    pub components: Option<usize>,
}

/// Parses `std::env::args`, runs the command and maps failures to exit
/// codes.
pub fn main() -> ExitCode {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Pretrain(a) => cmd_pretrain(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Project(a) => cmd_project(a),
    }
}

/// Resolved common settings.
struct Run {
    out: PathBuf,
    seed: u64,
}

fn start(common: &Common, r: &mut Resolver) -> CliResult<Run> {
    let seed = r.value("seed", common.seed, 0u64)?;
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let threads = r.hidden("threads", common.threads, cores)?;
    if threads == 0 {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    // A second command in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let default_out = format!("runs/run-{stamp}-s{seed}");
    let out: String = r.hidden(
        "out",
        common.out.as_ref().map(|p| p.display().to_string()),
        default_out,
    )?;
    Ok(Run {
        out: PathBuf::from(out),
        seed,
    })
}

fn finish(run: &Run, r: &Resolver) -> CliResult<()> {
    write(&run.out.join(CONFIG_FILE), &r.effective_text())
}

fn prepare_out(run: &Run, r: &Resolver) -> CliResult<()> {
    r.finish()?;
    std::fs::create_dir_all(&run.out)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", run.out.display())))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn input_path(r: &mut Resolver, key: &str, flag: Option<&PathBuf>) -> CliResult<Option<PathBuf>> {
    let p: Option<String> = r.optional(key, flag.map(|p| p.display().to_string()))?;
    match p {
        None => Ok(None),
        Some(p) => {
            let path = PathBuf::from(p);
            if path.exists() {
                Ok(Some(path))
            } else {
                Err(CliError::Usage(format!("input not found: {}", path.display())))
            }
        }
    }
}

fn required_path(r: &mut Resolver, key: &str, flag: Option<&PathBuf>) -> CliResult<PathBuf> {
    input_path(r, key, flag)?.ok_or_else(|| CliError::Usage(format!("--{} is required", key.replace('_', "-"))))
}

fn optional_column(r: &mut Resolver, key: &str, flag: Option<String>, default: &str) -> CliResult<Option<String>> {
    let v = r.value(key, flag, default.to_string())?;
    Ok((!v.is_empty()).then_some(v))
}

fn cmd_ingest(a: IngestArgs) -> CliResult<()> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let run = start(&a.common, &mut r)?;
    let input = required_path(&mut r, "input", a.input.as_ref())?;
    let d = CsvSchema::default();
    let exclude_col: Option<String> = r.optional("exclude_col", a.exclude_col)?;
    let exclude_values: Option<String> = r.optional("exclude_values", a.exclude_values)?;
    let schema = CsvSchema {
        learner: r.value("learner_col", a.learner_col, d.learner)?,
        question: r.value("question_col", a.question_col, d.question)?,
        skill: optional_column(&mut r, "skill_col", a.skill_col, "skill_id")?,
        order: optional_column(&mut r, "order_col", a.order_col, "order_id")?,
        assessment: r.value("assessment_col", a.assessment_col, d.assessment)?,
        skill_delimiter: r.value("skill_delimiter", a.skill_delimiter, d.skill_delimiter)?,
        exclude: match (exclude_col, exclude_values) {
            (Some(column), values) => Some(ColumnFilter {
                column,
                values: values
                    .unwrap_or_default()
                    .split(',')
                    .map(|v| v.trim().to_string())
                    .filter(|v| !v.is_empty())
                    .collect(),
            }),
            (None, Some(_)) => return Err(CliError::Usage("--exclude-values needs --exclude-col".into())),
            (None, None) => None,
        },
    };
    let dedup = r.value("dedup", a.dedup.then_some(true), false)?;
    let drop_unskilled = r.value("drop_unskilled", a.drop_unskilled.then_some(true), false)?;
    let min_seq_len = r.value("min_seq_len", a.min_seq_len, 0usize)?;
    prepare_out(&run, &r)?;

    let (raw, summary) = ingest_csv(&input, &schema)?;
    let stage = |ds: &Dataset, opts: PreprocessOptions| -> CliResult<Dataset> { Ok(preprocess(ds, opts)?) };
    let none = PreprocessOptions::default();
    let skilled = stage(&raw, PreprocessOptions { drop_unskilled, ..none })?;
    let deduped = stage(&skilled, PreprocessOptions { dedup, ..none })?;
    let ds = stage(&deduped, PreprocessOptions { min_seq_len, ..none })?;

    ds.write_dump(&run.out)?;
    build_skill_graph(&ds.question_skills, ds.num_questions())?.write_edges(&run.out.join(GRAPH_FILE))?;
    finish(&run, &r)?;
    println!("rows {}", summary.rows);
    println!("excluded_rows {}", summary.excluded);
    println!("unskilled_removed {}", raw.num_interactions() - skilled.num_interactions());
    println!("duplicates_removed {}", skilled.num_interactions() - deduped.num_interactions());
    println!("short_learners_removed {}", deduped.num_learners() - ds.num_learners());
    print_dataset(&ds, &run.out);
    Ok(())
}

fn print_dataset(ds: &Dataset, out: &Path) {
    println!("learners {}", ds.num_learners());
    println!("questions {}", ds.num_questions());
    println!("skills {}", ds.num_skills());
    println!("interactions {}", ds.num_interactions());
    println!("output {}", out.display());
}

fn cmd_synth(a: SynthArgs) -> CliResult<()> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let run = start(&a.common, &mut r)?;
    let d = SynthConfig::default();
    let m = MasteryModel::default();
    let cfg = SynthConfig {
        num_learners: r.value("learners", a.learners, d.num_learners)?,
        num_questions: r.value("questions", a.questions, d.num_questions)?,
        num_skills: r.value("skills", a.skills, d.num_skills)?,
        obs_per_learner: r.value("obs_per_learner", a.obs_per_learner, d.obs_per_learner)?,
        block_len: r.value("block_len", a.block_len, d.block_len)?,
        multi_skill_prob: r.value("multi_skill_prob", a.multi_skill_prob, d.multi_skill_prob)?,
        max_obs_per_question: r.optional("max_obs_per_question", a.max_obs_per_question)?,
        question_difficulty_spread: r.value("difficulty_spread", a.difficulty_spread, d.question_difficulty_spread)?,
        mastery: MasteryModel {
            learning_gain: r.value("learning_gain", a.learning_gain, m.learning_gain)?,
            ..m
        },
        seed: run.seed,
    };
    prepare_out(&run, &r)?;
    let ds = synth_generate(&cfg)?.dataset;
    ds.write_dump(&run.out)?;
    build_skill_graph(&ds.question_skills, ds.num_questions())?.write_edges(&run.out.join(GRAPH_FILE))?;
    finish(&run, &r)?;
    print_dataset(&ds, &run.out);
    Ok(())
}

fn load_dataset(r: &mut Resolver, flag: Option<&PathBuf>) -> CliResult<Dataset> {
    let dir = required_path(r, "data", flag)?;
    Ok(Dataset::read_dump(&dir)?)
}

/// The requested fold, or `None` to use every learner.
fn resolve_fold(r: &mut Resolver, a: &FoldArgs, ds: &Dataset, seed_value: u64) -> CliResult<Option<FoldSplit>> {
    let Some(index) = r.optional("fold", a.fold)? else {
        return Ok(None);
    };
    let k = r.value("k", a.k, 5usize)?;
    let frac = r.value("train_frac", a.train_frac, 0.7)?;
    if index >= k {
        return Err(CliError::Usage(format!("--fold {index} must be below --k {k}")));
    }
    Ok(Some(split_folds(ds, k, frac, seed_value)?.swap_remove(index)))
}

fn skipgram_config(r: &mut Resolver, a: SkipGramArgs, dim: usize, seed_value: u64) -> CliResult<SkipGramConfig> {
    let d = SkipGramConfig::default();
    Ok(SkipGramConfig {
        dim,
        window: r.value("window", a.window, d.window)?,
        negatives: r.value("negatives", a.negatives, d.negatives)?,
        epochs: r.value("sg_epochs", a.sg_epochs, d.epochs)?,
        lr: r.value("sg_lr", a.sg_lr, d.lr)?,
        seed: seed_value,
    })
}

fn cmd_pretrain(a: PretrainArgs) -> CliResult<()> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let run = start(&a.common, &mut r)?;
    let ds = load_dataset(&mut r, a.data.as_ref())?;
    let dim = r.value("dim", a.dim, SkipGramConfig::default().dim)?;
    let cfg = skipgram_config(&mut r, a.skipgram, dim, run.seed)?;
    let fold = resolve_fold(&mut r, &a.folds, &ds, run.seed)?;
    prepare_out(&run, &r)?;

    let steps: Vec<Vec<(usize, u8)>> = match &fold {
        Some(f) => f.train.iter().map(|&l| ds.sequences[l].steps()).collect(),
        None => ds.sequences.iter().map(|s| s.steps()).collect(),
    };
    let corpus = Corpus::from_steps(steps.iter().map(Vec::as_slice));
    let model = train_skipgram(&corpus, &cfg)?;
    model.table().save(&run.out.join(EMBEDDINGS_FILE))?;
    let log: String = model
        .epoch_losses()
        .iter()
        .enumerate()
        .map(|(e, l)| format!("{} {l}\n", e + 1))
        .collect();
    write(&run.out.join(PRETRAIN_LOG), &log)?;
    finish(&run, &r)?;
    println!("tokens {}", corpus.num_tokens());
    println!("vocabulary {}", model.tokens().len());
    println!("output {}", run.out.display());
    Ok(())
}

fn train_config(r: &mut Resolver, a: &ModelArgs, variant: Variant, embed_default: usize, seed_value: u64) -> CliResult<TrainConfig> {
    let d = TrainConfig::default();
    let ad = AdamConfig::default();
    let lambda = r.value("lambda", a.lambda, 0.1)?;
    let cfg = TrainConfig {
        embed_dim: r.value("embed_dim", a.embed_dim, embed_default)?,
        hidden: r.value("hidden", a.hidden, d.hidden)?,
        lambda: if variant.regularized() { lambda } else { 0.0 },
        dropout: r.value("dropout", a.dropout, d.dropout)?,
        adam: AdamConfig {
            lr: r.value("lr", a.lr, ad.lr)?,
            beta1: r.value("beta1", a.beta1, ad.beta1)?,
            beta2: r.value("beta2", a.beta2, ad.beta2)?,
            eps: r.value("eps", a.eps, ad.eps)?,
            grad_clip: r.value("grad_clip", a.grad_clip, ad.grad_clip)?,
        },
        epochs: r.value("epochs", a.epochs, d.epochs)?,
        batch_size: r.value("batch_size", a.batch_size, d.batch_size)?,
        max_len: r.value("max_len", a.max_len, d.max_len)?,
        seed: seed_value,
        init_mode: variant.init_mode(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_train(a: TrainArgs) -> CliResult<()> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let run = start(&a.common, &mut r)?;
    let variant = r.value("variant", a.model.variant, Variant::QdktBase)?;
    let graph_path = input_path(&mut r, "graph", a.graph.as_ref())?;
    let emb_path = input_path(&mut r, "embeddings", a.embeddings.as_ref())?;
    let mut missing = Vec::new();
    if variant.regularized() && graph_path.is_none() {
        missing.push("--graph");
    }
    if variant.pretrained() && emb_path.is_none() {
        missing.push("--embeddings");
    }
    if !missing.is_empty() {
        return Err(CliError::Usage(format!("{variant} requires {}", missing.join(" and "))));
    }
    let ds = load_dataset(&mut r, a.data.as_ref())?;
    let table = match (&emb_path, variant.pretrained()) {
        (Some(p), true) => Some(EmbeddingTable::load(p)?),
        _ => None,
    };
    let embed_default = table.as_ref().map_or(TrainConfig::default().embed_dim, EmbeddingTable::dim);
    let cfg = train_config(&mut r, &a.model, variant, embed_default, run.seed)?;
    let fold = resolve_fold(&mut r, &a.folds, &ds, run.seed)?;
    prepare_out(&run, &r)?;

    let lap = match (&graph_path, variant.regularized()) {
        (Some(p), true) => Some(laplacian(&QuestionGraph::read_edges(p, Some(ds.num_questions()))?)),
        _ => None,
    };
    let init = match table {
        Some(mut t) => {
            if t.dim() != cfg.embed_dim {
                return Err(CliError::Usage(format!(
                    "embedding table has dimension {}, --embed-dim is {}",
                    t.dim(),
                    cfg.embed_dim
                )));
            }
            let filled = t.fill_missing_questions(ds.num_questions());
            if filled > 0 {
                log::warn!("{filled} questions have no pretrained vector; using zeros");
            }
            Some(build_wxv(&t, ds.num_questions(), cfg.embed_dim)?)
        }
        None => None,
    };
    let level = variant.level();
    let trained = train(&ds, fold.as_ref(), level, &cfg, lap.as_ref(), init)?;

    let log: String = trained.log.iter().map(|e| e.line() + "\n").collect();
    write(&run.out.join(LOSS_LOG), &log)?;
    let items = trained.params.dims().items;
    let ckpt = Checkpoint::new(trained.params)
        .with_meta("variant", variant)
        .with_meta("items", items)
        .with_meta("seed", run.seed)
        .with_meta("fold", fold.as_ref().map_or("all".to_string(), |f| f.fold_index.to_string()))
        .with_meta("init_mode", cfg.init_mode.as_str())
        .with_meta("lambda", cfg.lambda)
        .with_meta(
            "config_fingerprint",
            format!("{:016x}", seed::fingerprint(r.effective_text().as_bytes())),
        );
    ckpt.save(&run.out.join(CHECKPOINT_FILE))?;
    finish(&run, &r)?;
    if let Some(last) = trained.log.last() {
        println!("final_train_loss {}", last.total);
    }
    if let Some(f) = &fold {
        let (scores, labels) = evaluate_fold(&ckpt.params, &ds, f, level)?;
        println!("test_auc {}", auc(&scores, &labels)?);
    }
    println!("output {}", run.out.display());
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> CliResult<()> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let run = start(&a.common, &mut r)?;
    let variant = r.value("variant", a.model.variant, Variant::QdktBase)?;
    let graph_path = input_path(&mut r, "graph", a.graph.as_ref())?;
    let ds = load_dataset(&mut r, a.data.as_ref())?;
    let train_cfg = train_config(&mut r, &a.model, variant, TrainConfig::default().embed_dim, run.seed)?;
    let k = r.value("k", a.k, 5usize)?;
    let train_frac = r.value("train_frac", a.train_frac, 0.7)?;
    let grid: Option<String> = r.optional("lambda_grid", a.lambda_grid)?;
    let lambda_grid = match grid {
        None => Vec::new(),
        Some(g) => g
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Usage(format!("bad --lambda-grid: {e}")))?,
    };
    let validation_frac = r.value("validation_frac", a.validation_frac, 0.2)?;
    let skipgram = skipgram_config(&mut r, a.skipgram, train_cfg.embed_dim, run.seed)?;
    prepare_out(&run, &r)?;

    let graph = match &graph_path {
        Some(p) => Some(QuestionGraph::read_edges(p, Some(ds.num_questions()))?),
        None => None,
    };
    let cfg = CvConfig {
        train: train_cfg,
        skipgram,
        k,
        train_frac,
        lambda_grid,
        validation_frac,
    };
    let report = cross_validate(&ds, &cfg, variant, run.seed, graph.as_ref())?;
    write(&run.out.join(REPORT_FILE), &(report.to_json()? + "\n"))?;
    finish(&run, &r)?;
    println!("variant {variant}");
    println!("mean_auc {}", report.mean);
    println!("std_auc {}", report.std);
    println!("output {}", run.out.display());
    Ok(())
}

fn cmd_project(a: ProjectArgs) -> CliResult<()> {
    let mut r = Resolver::load(a.common.config.as_deref())?;
    let run = start(&a.common, &mut r)?;
    let ckpt_path = input_path(&mut r, "checkpoint", a.checkpoint.as_ref())?;
    let emb_path = input_path(&mut r, "embeddings", a.embeddings.as_ref())?;
    let questions: Option<usize> = r.optional("questions", a.questions)?;
    let components = r.value("components", a.components, 2usize)?;
    prepare_out(&run, &r)?;

    let w_xv = match (ckpt_path, emb_path) {
        (Some(p), None) => Checkpoint::load(&p)?.params.w_xv,
        (None, Some(p)) => {
            let n = questions.ok_or_else(|| CliError::Usage("--embeddings needs --questions".into()))?;
            let mut t = EmbeddingTable::load(&p)?;
            t.fill_missing_questions(n);
            build_wxv(&t, n, t.dim())?
        }
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --checkpoint and --embeddings".into(),
            ))
        }
    };
    let proj = pca_project(&w_xv, components)?;
    let mut csv = String::from("col_index,question_index,assessment");
    for c in 1..=components {
        let _ = write!(csv, ",pc{c}");
    }
    csv.push('\n');
    for col in 0..proj.points.rows() {
        let _ = write!(csv, "{col},{},{}", proj.items[col], proj.labels[col]);
        for v in proj.points.row(col) {
            let _ = write!(csv, ",{v}");
        }
        csv.push('\n');
    }
    write(&run.out.join(PROJECTION_FILE), &csv)?;
    finish(&run, &r)?;
    let sep = separation_score(&proj.points, &proj.labels)?;
    let ratios: Vec<String> = proj.explained_ratio.iter().map(|v| format!("{v:.4}")).collect();
    println!("explained_ratio {}", ratios.join(" "));
    println!("separation_score {}{}", sep.score, if sep.capped { " (capped)" } else { "" });
    println!("output {}", run.out.display());
    Ok(())
}
