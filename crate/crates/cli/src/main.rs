//! `structvec` command-line entry point.
//!
//! Exit status: 0 on success, 1 on usage or configuration errors, 2 on
//! data and format errors. Logs go to stderr.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::LevelFilter;

use structvec::classify::Arch;
use structvec::train::Mode;

#[derive(Debug, Parser)]
#[command(
    name = "structvec",
    version,
    about = "Word embeddings from text and dependency-structure contexts"
)]
#[command(arg_required_else_help = true, propagate_version = true)]
pub struct Cli {
    /// Master seed; every random stream is derived from it [default: 1, or
    /// the spec file's seed for `experiment`]
    #[arg(long, global = true, help_heading = "Global options")]
    pub seed: Option<u64>,

    /// Worker threads for training and experiment grids [default: 1, or
    /// the spec file's value for `experiment`]
    #[arg(long, global = true, help_heading = "Global options")]
    pub threads: Option<usize>,

    /// Log verbosity on stderr: off, error, warn, info, debug, trace
    #[arg(long, global = true, default_value = "warn", help_heading = "Global options")]
    pub log_level: LevelFilter,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write (word, structural feature) pairs from a parsed corpus
    ExtractFeatures(ExtractArgs),
    /// Count words of a corpus, or features of a pair file
    BuildVocab(VocabArgs),
    /// Train embeddings
    Train(TrainArgs),
    /// Print the nearest neighbours of a word
    Nearest(NearestArgs),
    /// Train a pair classifier
    ClassifyTrain(ClassifyTrainArgs),
    /// Evaluate a pair classifier
    ClassifyEval(ClassifyEvalArgs),
    /// Pair classifiers: `classify train` and `classify eval`
    Classify {
        #[command(subcommand)]
        action: ClassifyAction,
    },
    /// Run a vector-set by architecture accuracy grid
    Experiment(ExperimentArgs),
}

#[derive(Debug, Subcommand)]
pub enum ClassifyAction {
    /// Train a pair classifier
    Train(ClassifyTrainArgs),
    /// Evaluate a pair classifier
    Eval(ClassifyEvalArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Parsed corpus (CoNLL-U or CoNLL-X)
    #[arg(long)]
    pub input: PathBuf,
    /// Pair dump to write, one `word<TAB>feature` line per pair
    #[arg(long)]
    pub output: PathBuf,
    /// Feature families to extract
    #[arg(long, default_value = "arc,prepf,pat,so")]
    pub feat: String,
    /// Keep only pairs whose word and partner are in this vocabulary
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Dependency label overrides, e.g. `dobj=obj,nsubjpass=nsubj:pass`
    #[arg(long, default_value = "")]
    pub labels: String,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["input", "pairs"]))]
pub struct VocabArgs {
    /// Parsed corpus; builds a word vocabulary
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Pair dump; builds a feature vocabulary
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Vocabulary file to write
    #[arg(long)]
    pub output: PathBuf,
    /// Drop items seen fewer times than this
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Parsed corpus (CoNLL-U or CoNLL-X)
    #[arg(long)]
    pub corpus: PathBuf,
    /// Model file to write (input vectors)
    #[arg(long)]
    pub output: PathBuf,
    /// Training regime: text, features, joint or sequential
    #[arg(long, default_value = "joint")]
    pub mode: Mode,
    /// Pair dump to train the feature term on; extracted from the corpus when absent
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Feature families to extract when no pair dump is given
    #[arg(long, default_value = "arc,prepf,pat,so")]
    pub feat: String,
    /// Word vocabulary; built from the corpus when absent
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Feature vocabulary; built from the pairs when absent
    #[arg(long)]
    pub feature_vocab: Option<PathBuf>,
    /// Minimum count for vocabularies built here
    #[arg(long, default_value_t = 1)]
    pub min_count: u64,
    /// Embedding dimension
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    /// Context window on each side
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Negative samples per positive
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    /// Weight of the feature term
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Initial learning rate
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    /// Epochs over the corpus and pairs
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    /// Feature refinement epochs in sequential mode [default: --epochs]
    #[arg(long)]
    pub feature_epochs: Option<usize>,
    /// Frequent-word subsampling threshold; 0 disables it
    #[arg(long, default_value_t = 0.0)]
    pub subsample: f64,
    /// Also write the context matrices as `<output>.wctx` and `<output>.fctx`
    #[arg(long)]
    pub contexts: bool,
}

#[derive(Debug, Args)]
pub struct NearestArgs {
    /// Embedding model file
    #[arg(long)]
    pub model: PathBuf,
    /// Query word
    #[arg(long)]
    pub word: String,
    /// Number of neighbours
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct ClassifierArgs {
    /// Hidden layer width
    #[arg(long, default_value_t = 200)]
    pub hidden: usize,
    /// Leaky rectifier slope for negative inputs
    #[arg(long, default_value_t = 0.01)]
    pub slope: f64,
    /// Mini-batch size
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    /// SGD learning rate
    #[arg(long, default_value_t = 0.05)]
    pub learning_rate: f64,
    /// Maximum epochs
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    /// Epochs without dev improvement before stopping
    #[arg(long, default_value_t = 5)]
    pub patience: usize,
}

#[derive(Debug, Args)]
pub struct ClassifyTrainArgs {
    /// Classifier architecture: mlp, shared-mlp or shared-cos
    #[arg(long)]
    pub arch: Arch,
    /// Embedding model file
    #[arg(long)]
    pub model: PathBuf,
    /// Training pairs, `a<TAB>b[<TAB>label]`
    #[arg(long)]
    pub pairs: PathBuf,
    /// Development pairs for early stopping
    #[arg(long)]
    pub dev: Option<PathBuf>,
    /// Checkpoint file to write
    #[arg(long)]
    pub output: PathBuf,
    /// Non-matches generated per match when a pair file has no labels
    #[arg(long, default_value_t = 1.0)]
    pub negative_ratio: f64,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyEvalArgs {
    /// Classifier checkpoint
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Embedding model file
    #[arg(long)]
    pub model: PathBuf,
    /// Evaluation pairs, `a<TAB>b[<TAB>label]`
    #[arg(long)]
    pub pairs: PathBuf,
    /// Non-matches generated per match when a pair file has no labels
    #[arg(long, default_value_t = 1.0)]
    pub negative_ratio: f64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment spec: `key = value` lines
    #[arg(long)]
    pub spec: PathBuf,
    /// Also write the report as TSV here
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::new().filter_level(cli.log_level).init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
