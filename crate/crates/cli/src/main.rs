use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Similarity-order post-processing and evaluation for word embeddings.
#[derive(Parser)]
#[command(name = "simorder", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the alpha-transform to an embedding file and save the result
    Transform(TransformArgs),
    /// Run one benchmark at a single alpha
    Eval(EvalArgs),
    /// Evaluate benchmarks across an alpha grid and emit a report
    Sweep(SweepArgs),
    /// Render a sweep report as Markdown or canonical CSV
    Report(ReportArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    /// Text with a `V D` header (word2vec/fastText `.vec`)
    Vec,
    /// Headerless text (GloVe)
    Glove,
    /// word2vec binary
    Bin,
}

impl From<FormatArg> for simorder::EmbeddingFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Vec => simorder::EmbeddingFormat::TextWithHeader,
            FormatArg::Glove => simorder::EmbeddingFormat::TextHeaderless,
            FormatArg::Bin => simorder::EmbeddingFormat::Binary,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum LookupArg {
    Exact,
    /// Exact match first, then case-insensitive fallback
    Fold,
}

impl From<LookupArg> for simorder::LookupMode {
    fn from(l: LookupArg) -> Self {
        match l {
            LookupArg::Exact => simorder::LookupMode::Exact,
            LookupArg::Fold => simorder::LookupMode::CaseFold,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Analogy,
    Wordsim,
    Sts,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum DatasetFormatArg {
    Simlex,
    Men,
    Generic3col,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum GramScopeArg {
    /// Gram matrix over the restricted (capped) vocabulary
    Restricted,
    /// Gram matrix over the full file before restriction
    Full,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum ReportFormatArg {
    Csv,
    Markdown,
}

/// Flags shared by every command that reads an embedding file.
#[derive(Args)]
pub struct InputArgs {
    /// Input embedding file
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,

    /// Embedding file format
    #[arg(long, value_enum, default_value_t = FormatArg::Vec)]
    pub format: FormatArg,

    /// Keep only the first N unique words in file order (0 = no cap)
    #[arg(long, value_name = "N", default_value_t = 200_000)]
    pub max_vocab: usize,

    /// Length-normalize rows before the gram/transform pipeline
    #[arg(long)]
    pub pre_normalize: bool,

    /// Relative eigenvalue floor applied before exponentiation
    #[arg(long, value_name = "F", default_value_t = simorder::transform::DEFAULT_EIG_FLOOR)]
    pub eig_floor: f64,

    /// Vocabulary the gram matrix is accumulated over
    #[arg(long, value_enum, default_value_t = GramScopeArg::Restricted)]
    pub gram_scope: GramScopeArg,

    /// Load a previously saved eigenbasis instead of recomputing it
    #[arg(long, value_name = "PATH")]
    pub basis: Option<PathBuf>,

    /// Save the eigenbasis for later reuse
    #[arg(long, value_name = "PATH")]
    pub save_basis: Option<PathBuf>,
}

#[derive(Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Transform exponent
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,

    /// Output embedding file
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,

    /// Output format (defaults to the input format)
    #[arg(long, value_enum, value_name = "FORMAT")]
    pub out_format: Option<FormatArg>,
}

#[derive(Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Transform exponent
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,

    /// Benchmark to run
    #[arg(long, value_enum)]
    pub task: TaskArg,

    /// Benchmark file
    #[arg(long, value_name = "PATH")]
    pub dataset: PathBuf,

    /// Scored-pair file format (wordsim task only)
    #[arg(long, value_enum)]
    pub dataset_format: Option<DatasetFormatArg>,

    /// Strip lemma-POS suffixes (-n/-v/-j) from MEN words
    #[arg(long)]
    pub strip_pos: bool,

    /// Stopword file for the sts task (defaults to the built-in list)
    #[arg(long, value_name = "PATH")]
    pub stopwords: Option<PathBuf>,

    /// Word lookup mode
    #[arg(long, value_enum, default_value_t = LookupArg::Fold)]
    pub lookup: LookupArg,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Alpha grid as START:END:STEP
    #[arg(long, default_value = "-1:1:0.05", allow_hyphen_values = true)]
    pub alphas: String,

    /// Benchmark(s) to run; repeat together with --dataset
    #[arg(long = "task", value_enum, required = true)]
    pub tasks: Vec<TaskArg>,

    /// Benchmark file(s), paired with --task by position
    #[arg(long = "dataset", value_name = "PATH", required = true)]
    pub datasets: Vec<PathBuf>,

    /// Scored-pair format(s): one value applies to all wordsim datasets,
    /// or repeat to pair with each --dataset by position
    #[arg(long = "dataset-format", value_enum)]
    pub dataset_formats: Vec<DatasetFormatArg>,

    /// Strip lemma-POS suffixes (-n/-v/-j) from MEN words
    #[arg(long)]
    pub strip_pos: bool,

    /// Stopword file for sts tasks (defaults to the built-in list)
    #[arg(long, value_name = "PATH")]
    pub stopwords: Option<PathBuf>,

    /// Word lookup mode
    #[arg(long, value_enum, default_value_t = LookupArg::Fold)]
    pub lookup: LookupArg,

    /// Where the CSV report is written
    #[arg(long, value_name = "PATH")]
    pub report: PathBuf,

    /// Write the Markdown summary here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReportArgs {
    /// CSV report produced by `sweep`
    #[arg(long, value_name = "PATH")]
    pub report: PathBuf,

    /// Output rendering
    #[arg(long, value_enum, default_value_t = ReportFormatArg::Markdown)]
    pub format: ReportFormatArg,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] simorder::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => {
                if e.is_evaluation_error() {
                    1
                } else {
                    2
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Transform(args) => commands::transform(args),
        Command::Eval(args) => commands::eval(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Report(args) => commands::report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
