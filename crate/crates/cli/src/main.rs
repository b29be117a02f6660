mod commands;
mod report;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::Settings;

/// Train and evaluate phrase composition models.
#[derive(Debug, Parser)]
#[command(name = "transweight", version)]
struct Cli {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter a phrase set against embeddings and label it train/test/dev.
    Split(SplitArgs),
    /// Train a model on the train portion of a labeled phrase set.
    Train(TrainArgs),
    /// Rank the composed vectors of a phrase set portion.
    Evaluate(EvaluateArgs),
    /// Compose one word pair and show its neighbors and ranks.
    Rank(RankArgs),
    /// Print the exact number of trainable parameters.
    ParamCount(ParamCountArgs),
    /// Write a synthetic embedding space and phrase set.
    GenSynth(GenSynthArgs),
    /// Prediction-time transformation dropout curve.
    DropoutExp(DropoutExpArgs),
    /// Check that a linear TransWeight folds into a single matrix.
    CollapseCheck(CollapseCheckArgs),
}

#[derive(Debug, Args)]
pub struct EmbeddingArgs {
    /// Embedding file.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// `text` or `binary`.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Phrase TSV: word1, word2, phrase.
    #[arg(long)]
    phrases: Option<PathBuf>,
    #[command(flatten)]
    embeddings: EmbeddingArgs,
    /// Train:test:dev proportions.
    #[arg(long)]
    ratio: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model kind, e.g. `matrix`, `fulllex`, `transweight`.
    #[arg(long)]
    model: Option<String>,
    /// Number of transformations (TransWeight family).
    #[arg(long)]
    t: Option<usize>,
    /// `identity`, `relu` or `tanh`.
    #[arg(long)]
    activation: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Labeled phrase TSV as written by `split`.
    #[arg(long)]
    phrases: Option<PathBuf>,
    #[command(flatten)]
    embeddings: EmbeddingArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    patience: Option<usize>,
    /// Training dropout on the transformed representations.
    #[arg(long)]
    dropout_rate: Option<f64>,
    /// `none` or `transformed_h`.
    #[arg(long)]
    dropout_site: Option<String>,
    #[arg(long)]
    adagrad_epsilon: Option<f64>,
    /// Stand-in for unseen words in lexicalized models: `nearest_neighbor` or `identity`.
    #[arg(long)]
    fallback: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    phrases: Option<PathBuf>,
    #[command(flatten)]
    embeddings: EmbeddingArgs,
    /// Portion of a labeled phrase set to evaluate.
    #[arg(long)]
    portion: Option<String>,
    /// `corrected` or `original`.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    fallback: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[command(flatten)]
    embeddings: EmbeddingArgs,
    #[arg(long)]
    word1: String,
    #[arg(long)]
    word2: String,
    /// Gold phrase token; when given, its ranks are printed too.
    #[arg(long)]
    phrase: Option<String>,
    /// Neighbors to list.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long)]
    fallback: Option<String>,
}

#[derive(Debug, Args)]
pub struct ParamCountArgs {
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    /// Lexicon size for lexicalized models.
    #[arg(long)]
    vocab_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenSynthArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    words_per_class: Option<usize>,
    #[arg(long)]
    num_phrases: Option<usize>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// `text` or `binary`.
    #[arg(long)]
    format: Option<String>,
    /// Significant digits in the text format, or `full`.
    #[arg(long)]
    precision: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DropoutExpArgs {
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    phrases: Option<PathBuf>,
    #[command(flatten)]
    embeddings: EmbeddingArgs,
    #[arg(long)]
    portion: Option<String>,
    /// Comma-separated rates in [0, 0.9].
    #[arg(long)]
    rates: Option<String>,
    /// Comma-separated modes: `full_transformation`, `per_parameter`.
    #[arg(long)]
    modes: Option<String>,
    /// Mask draws per rate.
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CollapseCheckArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Weighting variant to check.
    #[arg(long)]
    model: Option<String>,
    /// Random inputs to compare on.
    #[arg(long)]
    trials: Option<usize>,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    if let Some(threads) = settings.get(cli.threads, "threads")? {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    match cli.command {
        Command::Split(args) => commands::split(&settings, args),
        Command::Train(args) => commands::train(&settings, args),
        Command::Evaluate(args) => commands::evaluate(&settings, args),
        Command::Rank(args) => commands::rank(&settings, args),
        Command::ParamCount(args) => commands::param_count(&settings, args),
        Command::GenSynth(args) => commands::gen_synth(&settings, args),
        Command::DropoutExp(args) => commands::dropout_exp(&settings, args),
        Command::CollapseCheck(args) => commands::collapse_check(&settings, args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
