use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rand::Rng;
use transweight::ablation::{write_curve, DEFAULT_REPEATS};
use transweight::phrase::SplitLabel;
use transweight::rng::{derive_seed, rng_from};
use transweight::train::write_training_log;
use transweight::*;

use crate::report::{emit_report, unix_seconds, write_metadata};
use crate::settings::Settings;
use crate::{
    CollapseCheckArgs, DropoutExpArgs, EmbeddingArgs, EvaluateArgs, GenSynthArgs, ParamCountArgs, RankArgs, SplitArgs,
    TrainArgs,
};

pub const CHECKPOINT: &str = "checkpoint.bin";
pub const TRAIN_LOG: &str = "train_log.tsv";
pub const SPLIT: &str = "split.tsv";
pub const DROPOUT_CURVE: &str = "dropout_curve.tsv";
pub const SYNTH_EMBEDDINGS: &str = "embeddings.txt";
pub const SYNTH_EMBEDDINGS_BIN: &str = "embeddings.bin";
pub const SYNTH_PHRASES: &str = "phrases.tsv";

const DEFAULT_OUT_DIR: &str = "out";

fn out_dir(settings: &Settings, flag: Option<PathBuf>) -> Result<PathBuf> {
    let dir = settings.or(flag, "out_dir", PathBuf::from(DEFAULT_OUT_DIR))?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn load_embeddings(settings: &Settings, args: EmbeddingArgs) -> Result<EmbeddingSpace> {
    let path: PathBuf = settings.required(args.embeddings, "embeddings")?;
    let format = settings.or(args.format, "format", "text".to_string())?.parse::<EmbeddingFormat>()?;
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    EmbeddingSpace::load(BufReader::new(file), format).with_context(|| format!("reading {}", path.display()))
}

fn load_phrases(path: &Path) -> Result<PhraseDataset> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    PhraseDataset::read_tsv(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

/// The requested portion of a labeled set, or the whole set when unlabeled.
fn portion_of(data: &PhraseDataset, settings: &Settings, flag: Option<String>) -> Result<PhraseDataset> {
    let label: SplitLabel = settings.or(flag, "portion", "test".to_string())?.parse()?;
    let part = if data.labels().is_some() { data.portion(label) } else { data.clone() };
    ensure!(!part.is_empty(), "no phrases in the {label} portion");
    Ok(part)
}

fn load_checkpoint(settings: &Settings, flag: Option<PathBuf>) -> Result<Checkpoint> {
    let path: PathBuf = settings.required(flag, "checkpoint")?;
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    Checkpoint::read(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn resolver_for(checkpoint: &Checkpoint, settings: &Settings, flag: Option<String>) -> Result<Option<LexicalResolver>> {
    if !checkpoint.params.kind().is_lexicalized() {
        return Ok(None);
    }
    let policy: FallbackPolicy = settings.or(flag, "fallback", "nearest_neighbor".to_string())?.parse()?;
    let lexicon = checkpoint.lexicon.clone().context("checkpoint of a lexicalized model has no lexicon")?;
    Ok(Some(LexicalResolver::new(lexicon, policy)?))
}

pub fn split(settings: &Settings, args: SplitArgs) -> Result<()> {
    let started = unix_seconds();
    let phrases: PathBuf = settings.required(args.phrases, "phrases")?;
    let mut data = load_phrases(&phrases)?;
    let mut dropped = 0;
    if args.embeddings.embeddings.is_some() || settings.raw("embeddings").is_some() {
        let space = load_embeddings(settings, args.embeddings)?;
        (data, dropped) = filter_by_vocabulary(&data, &space);
    }
    let ratio: SplitRatio = settings.or(args.ratio, "ratio", "7:2:1".to_string())?.parse()?;
    let seed = settings.or(args.seed, "seed", 0)?;
    let split = split_dataset(&data, ratio, seed)?;

    let dir = out_dir(settings, args.out_dir)?;
    split.write_tsv(BufWriter::new(File::create(dir.join(SPLIT))?))?;
    write_metadata(&dir, "split", started)?;
    let count = |l| split.portion(l).len();
    println!(
        "train\t{}\ntest\t{}\ndev\t{}\ndropped\t{dropped}",
        count(SplitLabel::Train),
        count(SplitLabel::Test),
        count(SplitLabel::Dev)
    );
    Ok(())
}

fn train_config(settings: &Settings, args: &TrainArgs) -> Result<TrainConfig> {
    let mut config = TrainConfig::default();
    for key in TrainConfig::KEYS {
        if let Some(value) = settings.raw(key) {
            config.set(key, value)?;
        }
    }
    let flags = [
        ("learning_rate", args.learning_rate.map(|v| v.to_string())),
        ("batch_size", args.batch_size.map(|v| v.to_string())),
        ("max_epochs", args.max_epochs.map(|v| v.to_string())),
        ("patience", args.patience.map(|v| v.to_string())),
        ("dropout_rate", args.dropout_rate.map(|v| v.to_string())),
        ("dropout_site", args.dropout_site.clone()),
        ("seed", args.seed.map(|v| v.to_string())),
        ("adagrad_epsilon", args.adagrad_epsilon.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(value) = value {
            config.set(key, &value)?;
        }
    }
    // A positive rate with no site named means dropout on H.
    let site_named = args.dropout_site.is_some() || settings.raw("dropout_site").is_some();
    if config.dropout_rate > 0.0 && !site_named {
        config.dropout_site = DropoutSite::TransformedH;
    }
    config.validate()?;
    Ok(config)
}

pub fn train(settings: &Settings, args: TrainArgs) -> Result<()> {
    let started = unix_seconds();
    let config = train_config(settings, &args)?;
    let kind: ModelKind = settings.required::<String>(args.model.model, "model")?.parse()?;
    let phrases: PathBuf = settings.required(args.phrases, "phrases")?;
    let data = load_phrases(&phrases)?;
    ensure!(data.labels().is_some(), "{} has no split labels; run `split` first", phrases.display());
    let space = load_embeddings(settings, args.embeddings)?;
    let (train_set, dev) = (data.portion(SplitLabel::Train), data.portion(SplitLabel::Dev));

    let mut model_config = ModelConfig::new(kind, space.dim());
    if let Some(t) = settings.get(args.model.t, "t")? {
        model_config = model_config.with_t(t);
    }
    if let Some(activation) = settings.get(args.model.activation, "activation")? {
        model_config = model_config.with_activation(activation.parse()?);
    }
    let (lexicon, resolver) = if kind.is_lexicalized() {
        let lexicon = Lexicon::from_dataset(&train_set);
        model_config = model_config.with_vocab_size(lexicon.len());
        let policy: FallbackPolicy = settings.or(args.fallback, "fallback", "nearest_neighbor".to_string())?.parse()?;
        let resolver = LexicalResolver::new(lexicon.clone(), policy)?;
        (Some(lexicon), Some(resolver))
    } else {
        (None, None)
    };

    let model = init_model(&model_config, derive_seed(config.seed, "model/init"))?;
    let outcome = transweight::train(model, &train_set, &dev, &space, resolver.as_ref(), &config)?;

    let dir = out_dir(settings, args.out_dir)?;
    write_training_log(BufWriter::new(File::create(dir.join(TRAIN_LOG))?), &outcome.history)?;
    Checkpoint::new(outcome.best.clone(), lexicon).write(BufWriter::new(File::create(dir.join(CHECKPOINT))?))?;
    write_metadata(&dir, "train", started)?;
    println!(
        "{kind}\tparams {}\tepochs {}\tbest epoch {}\tdev loss {:.6}",
        outcome.best.param_count(),
        outcome.history.len(),
        outcome.best_epoch,
        outcome.best_dev_loss()
    );
    Ok(())
}

pub fn evaluate(settings: &Settings, args: EvaluateArgs) -> Result<()> {
    let started = unix_seconds();
    let checkpoint = load_checkpoint(settings, args.checkpoint)?;
    let phrases: PathBuf = settings.required(args.phrases, "phrases")?;
    let data = portion_of(&load_phrases(&phrases)?, settings, args.portion)?;
    let space = load_embeddings(settings, args.embeddings)?;
    let method: RankMethod = settings.or(args.method, "method", "corrected".to_string())?.parse()?;
    let resolver = resolver_for(&checkpoint, settings, args.fallback)?;

    let report = transweight::evaluate(&checkpoint.params, &data, &space, method, resolver.as_ref())?;
    let dir = out_dir(settings, args.out_dir)?;
    let name = checkpoint.params.kind().name();
    emit_report(&report, name, &dir)?;
    write_metadata(&dir, "evaluate", started)?;
    println!("{}", report.tsv_row(name));
    Ok(())
}

pub fn rank(settings: &Settings, args: RankArgs) -> Result<()> {
    let checkpoint = load_checkpoint(settings, args.checkpoint)?;
    let space = load_embeddings(settings, args.embeddings)?;
    let resolver = resolver_for(&checkpoint, settings, args.fallback)?;
    let (u, v) = (space.lookup(&args.word1)?, space.lookup(&args.word2)?);
    let mut input = CompositionInput::new(u, v);
    if let Some(resolver) = &resolver {
        input = input.with_words(resolver.resolve(&args.word1, &space)?, resolver.resolve(&args.word2, &space)?);
    }
    let composed = checkpoint.params.compose(&input, None)?;

    if let Some(phrase) = &args.phrase {
        println!("corrected rank\t{}", corrected_rank(&space, &composed, phrase)?);
        println!("original rank\t{}", original_rank(&space, &composed, phrase)?);
    }
    let exclude: HashSet<&str> = [args.word1.as_str(), args.word2.as_str()].into();
    for (token, sim) in space.nearest_neighbors(&composed, args.k, &exclude)? {
        println!("{token}\t{sim:.4}");
    }
    Ok(())
}

pub fn param_count(settings: &Settings, args: ParamCountArgs) -> Result<()> {
    let kind: ModelKind = settings.required::<String>(args.model, "model")?.parse()?;
    let n = settings.required(args.n, "n")?;
    let t = settings.get(args.t, "t")?;
    let t = if kind.is_transweight() { Some(t.unwrap_or(model::DEFAULT_TRANSFORMATIONS)) } else { t };
    let vocab = settings.get(args.vocab_size, "vocab_size")?;
    println!("{}", transweight::param_count(kind, n, t, vocab)?);
    Ok(())
}

fn text_precision(raw: &str) -> Result<TextPrecision> {
    if raw.eq_ignore_ascii_case("full") {
        return Ok(TextPrecision::Full);
    }
    let digits: usize = raw.parse().with_context(|| format!("precision {raw:?}"))?;
    ensure!((1..=17).contains(&digits), "precision must be 1..=17 significant digits or `full`");
    Ok(TextPrecision::Significant(digits))
}

pub fn gen_synth(settings: &Settings, args: GenSynthArgs) -> Result<()> {
    let started = unix_seconds();
    let d = SyntheticConfig::default();
    let config = SyntheticConfig {
        n: settings.or(args.n, "n", d.n)?,
        num_classes: settings.or(args.classes, "classes", d.num_classes)?,
        words_per_class: settings.or(args.words_per_class, "words_per_class", d.words_per_class)?,
        num_phrases: settings.or(args.num_phrases, "num_phrases", d.num_phrases)?,
        noise_sigma: settings.or(args.noise_sigma, "noise_sigma", d.noise_sigma)?,
        seed: settings.or(args.seed, "seed", d.seed)?,
    };
    let format: EmbeddingFormat = settings.or(args.format, "format", "text".to_string())?.parse()?;
    let precision = text_precision(&settings.or(args.precision, "precision", "6".to_string())?)?;
    let (space, data) = generate_synthetic(&config)?;

    let dir = out_dir(settings, args.out_dir)?;
    match format {
        EmbeddingFormat::Text => {
            space.write_text(BufWriter::new(File::create(dir.join(SYNTH_EMBEDDINGS))?), precision)?
        }
        EmbeddingFormat::Binary => space.write_binary(BufWriter::new(File::create(dir.join(SYNTH_EMBEDDINGS_BIN))?))?,
    }
    data.write_tsv(BufWriter::new(File::create(dir.join(SYNTH_PHRASES))?))?;
    write_metadata(&dir, "gen-synth", started)?;
    println!("words\t{}\nphrases\t{}", config.vocabulary_size(), data.len());
    Ok(())
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| anyhow::anyhow!("{what} {s:?}: {e}")))
        .collect()
}

pub fn dropout_exp(settings: &Settings, args: DropoutExpArgs) -> Result<()> {
    let started = unix_seconds();
    let checkpoint = load_checkpoint(settings, args.checkpoint)?;
    let phrases: PathBuf = settings.required(args.phrases, "phrases")?;
    let data = portion_of(&load_phrases(&phrases)?, settings, args.portion)?;
    let space = load_embeddings(settings, args.embeddings)?;

    let rates = match settings.get(args.rates, "rates")? {
        Some(raw) => parse_list::<f64>(&raw, "rate")?,
        None => (0..10).map(|i| i as f64 / 10.0).collect(),
    };
    let modes = match settings.get(args.modes, "modes")? {
        Some(raw) => parse_list::<AblationMode>(&raw, "mode")?,
        None => AblationMode::BOTH.to_vec(),
    };
    ensure!(!rates.is_empty() && !modes.is_empty(), "need at least one rate and one mode");
    let repeats = settings.or(args.repeats, "repeats", DEFAULT_REPEATS)?;
    let seed = settings.or(args.seed, "seed", 0)?;

    let curve = dropout_experiment(&checkpoint.params, &data, &space, &rates, &modes, seed, repeats)?;
    let dir = out_dir(settings, args.out_dir)?;
    write_curve(BufWriter::new(File::create(dir.join(DROPOUT_CURVE))?), &curve)?;
    write_metadata(&dir, "dropout-exp", started)?;
    write_curve(std::io::stdout().lock(), &curve)?;
    Ok(())
}

pub fn collapse_check(settings: &Settings, args: CollapseCheckArgs) -> Result<()> {
    let n = settings.or(args.n, "n", 8)?;
    let t = settings.or(args.t, "t", 5)?;
    let seed = settings.or(args.seed, "seed", 0)?;
    let trials = settings.or(args.trials, "trials", 100)?;
    let kind: ModelKind = settings.or(args.model, "model", "transweight".to_string())?.parse()?;
    if !kind.is_transweight() {
        bail!("collapse-check needs a TransWeight-family model, got {kind}");
    }

    let config = ModelConfig::new(kind, n).with_t(t).with_activation(Activation::Identity);
    let mut model = init_model(&config, derive_seed(seed, "collapse/init"))?;
    let mut rng = rng_from(derive_seed(seed, "collapse/params"));
    for tensor in model.tensors_mut() {
        tensor.data.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
    }
    let matrix = collapse_transweight_linear(&model)?.into_matrix_model()?;

    let mut rng = rng_from(derive_seed(seed, "collapse/inputs"));
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let input = CompositionInput::new(&u, &v);
        let (full, folded) = (model.compose(&input, None)?, matrix.compose(&input, None)?);
        worst = full.iter().zip(&folded).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    println!("max deviation\t{worst:e}");
    if worst < 1e-9 {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        bail!("collapsed model deviates by {worst:e}")
    }
}
