//! The `docsim` command line: ingest, embed, train-toy, rank, eval, ablate.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Every run writes its
//! resolved configuration as one JSON line to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::corpus::{self, Corpus, CorpusFormat};
use crate::embedding::{self, EmbeddedCorpus, EmbeddingProvider, HashEmbedder};
use crate::eval::{self, GroundTruth, MetricsReport};
use crate::scoring::{self, InferenceMode, NormPooling, RankOptions, RankedList, Scorer};
use crate::training::{self, ContrastiveConfig, ToyModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "docsim",
    version,
    about = "Rank long documents by hierarchical sentence similarity"
)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "SDR_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Human-readable output instead of compact machine output.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Parse and validate a corpus, write canonical JSONL.
    Ingest(IngestArgs),
    /// Embed every sentence of a corpus into a store.
    Embed(EmbedArgs),
    /// Train the bag-of-tokens toy model with the contrastive objective.
    TrainToy(TrainArgs),
    /// Rank candidates against one or more source documents.
    Rank(RankArgs),
    /// Score rank reports against ground truth.
    Eval(EvalArgs),
    /// Compare inference variants on one corpus and ground truth.
    Ablate(AblateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatArg {
    Jsonl,
    PlaintextDir,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => CorpusFormat::Jsonl,
            FormatArg::PlaintextDir => CorpusFormat::PlaintextDir,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Sdr,
    Paragraph,
    First,
    All,
    Cls,
}

impl From<ModeArg> for InferenceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sdr => InferenceMode::Sdr,
            ModeArg::Paragraph => InferenceMode::Paragraph,
            ModeArg::First => InferenceMode::First,
            ModeArg::All => InferenceMode::All,
            ModeArg::Cls => InferenceMode::Cls,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoolingArg {
    AllCells,
    RowMaxima,
}

impl From<PoolingArg> for NormPooling {
    fn from(p: PoolingArg) -> Self {
        match p {
            PoolingArg::AllCells => NormPooling::AllCells,
            PoolingArg::RowMaxima => NormPooling::RowMaxima,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderArg {
    Hash,
    Toy,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StoreFormatArg {
    Binary,
    Jsonl,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub format: FormatArg,
    #[arg(long)]
    pub output: PathBuf,
    /// Fail when any document is dropped.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CorpusArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    pub corpus_format: FormatArg,
}

#[derive(Debug, Args, Serialize)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value = "hash")]
    pub provider: ProviderArg,
    /// Dimension of the hash provider.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(2..))]
    pub dim: u32,
    /// Checkpoint directory of the toy provider.
    #[arg(long, required_if_eq("provider", "toy"))]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "binary")]
    pub store_format: StoreFormatArg,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Receives model.sdre, vocab.txt and loss.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(2..))]
    pub dim: u32,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    #[arg(long, default_value_t = training::DEFAULT_MARGIN)]
    pub margin: f64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    pub log_every: u32,
    #[arg(long, default_value_t = 0.5)]
    pub intra_probability: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RankArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Source document id; repeat for several sources.
    #[arg(long, required_unless_present = "all_sources")]
    pub source: Vec<String>,
    /// Rank against every document of the corpus in turn.
    #[arg(long, conflicts_with = "source")]
    pub all_sources: bool,
    #[arg(long, value_enum, default_value = "sdr")]
    pub mode: ModeArg,
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, value_enum, default_value = "all-cells")]
    pub pooling: PoolingArg,
    #[arg(long, default_value_t = scoring::DEFAULT_FIRST_WINDOW as u32, value_parser = clap::value_parser!(u32).range(1..))]
    pub first_window: u32,
    #[arg(long)]
    pub explain: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: u32,
}

fn parse_k(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("invalid k {s:?}; expected a positive integer")),
        Ok(k) => Ok(k),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Rank report files (JSONL).
    #[arg(long, required = true, num_args = 1..)]
    pub rankings: Vec<PathBuf>,
    #[arg(long)]
    pub ground_truth: PathBuf,
    /// Comma-separated cutoffs for HR@k.
    #[arg(long, default_value = "10,100", value_delimiter = ',', value_parser = parse_k)]
    pub k: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct AblateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub ground_truth: PathBuf,
    #[arg(long, default_value = "10,100", value_delimiter = ',', value_parser = parse_k)]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = scoring::DEFAULT_FIRST_WINDOW as u32, value_parser = clap::value_parser!(u32).range(1..))]
    pub first_window: u32,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Usage problems exit with 1, everything about the data with 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Ok(line) = serde_json::to_string(&cli) {
        eprintln!("{{\"config\":{line}}}");
    }
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            EXIT_DATA
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Embed(a) => cmd_embed(a, cli.seed),
        Command::TrainToy(a) => cmd_train_toy(a, cli.seed),
        Command::Rank(a) => cmd_rank(a, cli.pretty),
        Command::Eval(a) => cmd_eval(a, cli.pretty),
        Command::Ablate(a) => cmd_ablate(a, cli.pretty),
    }
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn load_corpus(args: &CorpusArgs) -> anyhow::Result<Corpus> {
    let out = corpus::parse_corpus(&args.corpus, args.corpus_format.into())
        .with_context(|| format!("reading corpus {}", args.corpus.display()))?;
    for d in &out.dropped {
        eprintln!(
            "warning: dropped document {:?} (record {}): no sentences",
            d.id, d.record
        );
    }
    Ok(out.corpus)
}

fn load_store(path: &Path, corpus: &Corpus) -> anyhow::Result<EmbeddedCorpus> {
    let store = embedding::load_embeddings(path)
        .with_context(|| format!("reading embeddings {}", path.display()))?;
    store.check_shape(corpus)?;
    Ok(store)
}

fn load_ground_truth(path: &Path) -> anyhow::Result<GroundTruth> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(GroundTruth::from_jsonl(BufReader::new(f))?)
}

pub fn cmd_ingest(a: &IngestArgs) -> CliResult<()> {
    let out = corpus::parse_corpus(&a.input, a.format.into())
        .with_context(|| format!("reading {}", a.input.display()))?;
    for d in &out.dropped {
        eprintln!(
            "warning: dropped document {:?} (record {}): no sentences",
            d.id, d.record
        );
    }
    if a.strict && !out.dropped.is_empty() {
        return Err(anyhow!("{} document(s) dropped under --strict", out.dropped.len()).into());
    }
    let mut w = output(Some(&a.output))?;
    corpus::serialize_corpus(&out.corpus, &mut w)?;
    w.flush().map_err(anyhow::Error::from)?;
    Ok(())
}

pub fn cmd_embed(a: &EmbedArgs, seed: u64) -> CliResult<()> {
    let corpus = load_corpus(&a.corpus)?;
    let provider: Box<dyn EmbeddingProvider> = match a.provider {
        ProviderArg::Hash => Box::new(HashEmbedder::new(a.dim as usize, seed)),
        ProviderArg::Toy => {
            let dir = a
                .model
                .as_ref()
                .ok_or_else(|| CliError::Usage("--model is required".into()))?;
            Box::new(
                ToyModel::load(dir).with_context(|| format!("loading model {}", dir.display()))?,
            )
        }
    };
    let store = embedding::embed_corpus(provider.as_ref(), &corpus, a.workers as usize)?;
    match a.store_format {
        StoreFormatArg::Binary => embedding::save_embeddings(&store, &a.output),
        StoreFormatArg::Jsonl => embedding::save_embeddings_jsonl(&store, &a.output),
    }
    .with_context(|| format!("writing {}", a.output.display()))?;
    Ok(())
}

pub fn cmd_train_toy(a: &TrainArgs, seed: u64) -> CliResult<()> {
    let cfg = ContrastiveConfig {
        margin: a.margin,
        learning_rate: a.lr,
        steps: a.steps,
        seed,
        dimension: a.dim as usize,
        intra_probability: a.intra_probability,
        log_every: a.log_every as usize,
        ..ContrastiveConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let corpus = load_corpus(&a.corpus)?;
    let out = training::train_toy(&corpus, &cfg)?;
    out.model.save(&a.out_dir)?;
    let trace =
        fs::File::create(a.out_dir.join(training::TRACE_FILE)).map_err(anyhow::Error::from)?;
    training::write_trace_csv(&out.trace, io::BufWriter::new(trace))?;
    Ok(())
}

fn rank_options(
    mode: InferenceMode,
    normalize: bool,
    pooling: NormPooling,
    first_window: u32,
    workers: u32,
) -> RankOptions {
    RankOptions {
        mode,
        normalize,
        pooling,
        first_window: first_window as usize,
        workers: workers as usize,
        explain: false,
    }
}

pub fn cmd_rank(a: &RankArgs, pretty: bool) -> CliResult<()> {
    let corpus = load_corpus(&a.corpus)?;
    let store = load_store(&a.embeddings, &corpus)?;
    let mut options = rank_options(
        a.mode.into(),
        !a.no_normalize,
        a.pooling.into(),
        a.first_window,
        a.workers,
    );
    options.explain = a.explain;
    let scorer = Scorer::new(&store, options)?;
    let lists: Vec<RankedList> = if a.all_sources {
        scorer.rank_all()?
    } else {
        a.source
            .iter()
            .map(|s| scorer.rank(s))
            .collect::<Result<_, _>>()?
    };
    // with --pretty and no --out, stdout carries the table only
    if a.out.is_some() || !pretty {
        let mut w = output(a.out.as_deref())?;
        scoring::write_rank_report(&lists, &mut w)?;
        w.flush().map_err(anyhow::Error::from)?;
    }
    if pretty {
        let stdout = io::stdout();
        let mut so = stdout.lock();
        for list in &lists {
            let _ = writeln!(so, "source {}", list.source);
            for (i, e) in list.entries.iter().enumerate() {
                let _ = writeln!(so, "{:>5}  {:>10.6}  {}", i + 1, e.score, e.id);
            }
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>, pretty: bool) -> anyhow::Result<()> {
    let mut w = output(out)?;
    if pretty {
        serde_json::to_writer_pretty(&mut w, value)?;
    } else {
        serde_json::to_writer(&mut w, value)?;
    }
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs, pretty: bool) -> CliResult<()> {
    let mut lists = Vec::new();
    for path in &a.rankings {
        let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        lists.extend(
            scoring::read_rank_report(BufReader::new(f))
                .with_context(|| format!("reading {}", path.display()))?,
        );
    }
    let gt = load_ground_truth(&a.ground_truth)?;
    let report: MetricsReport = eval::evaluate(&lists, &gt, &a.k)?;
    write_json(&report, a.out.as_deref(), pretty)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct AblationRow {
    name: &'static str,
    mode: InferenceMode,
    normalize: bool,
    metrics: eval::AggregateMetrics,
}

#[derive(Debug, Serialize)]
struct AblationReport {
    variants: Vec<AblationRow>,
}

pub fn cmd_ablate(a: &AblateArgs, pretty: bool) -> CliResult<()> {
    let corpus = load_corpus(&a.corpus)?;
    let store = load_store(&a.embeddings, &corpus)?;
    let gt = load_ground_truth(&a.ground_truth)?;
    gt.validate_ids(corpus.documents().iter().map(|d| d.id.as_str()))?;
    let mut variants = vec![
        ("full", InferenceMode::Sdr, true),
        ("no-normalization", InferenceMode::Sdr, false),
        ("paragraph-level", InferenceMode::Paragraph, true),
        ("no-hierarchy-first", InferenceMode::First, true),
        ("no-hierarchy-all", InferenceMode::All, true),
    ];
    if store.has_cls() {
        variants.push(("cls", InferenceMode::Cls, true));
    }
    let mut rows = Vec::new();
    for (name, mode, normalize) in variants {
        let opts = rank_options(
            mode,
            normalize,
            NormPooling::AllCells,
            a.first_window,
            a.workers,
        );
        let scorer = Scorer::new(&store, opts)?;
        let lists = gt
            .sources()
            .map(|s| scorer.rank(s))
            .collect::<Result<Vec<_>, _>>()?;
        let report = eval::evaluate(&lists, &gt, &a.k)?;
        rows.push(AblationRow {
            name,
            mode,
            normalize,
            metrics: report.aggregate,
        });
    }
    write_json(&AblationReport { variants: rows }, a.out.as_deref(), pretty)?;
    Ok(())
}

impl From<corpus::CorpusError> for CliError {
    fn from(e: corpus::CorpusError) -> Self {
        CliError::Data(e.into())
    }
}

impl From<embedding::EmbeddingError> for CliError {
    fn from(e: embedding::EmbeddingError) -> Self {
        CliError::Data(e.into())
    }
}

impl From<scoring::ScoringError> for CliError {
    fn from(e: scoring::ScoringError) -> Self {
        CliError::Data(e.into())
    }
}

impl From<eval::EvalError> for CliError {
    fn from(e: eval::EvalError) -> Self {
        CliError::Data(e.into())
    }
}

impl From<training::TrainingError> for CliError {
    fn from(e: training::TrainingError) -> Self {
        CliError::Data(e.into())
    }
}
